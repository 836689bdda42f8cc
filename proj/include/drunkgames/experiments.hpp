#pragma once

// Figure pipelines. Each figure writes `<out>/<figure>/<dataset>.csv`,
// `params.json` with every resolved parameter, and `manifest.json` listing
// the files with their SHA-256 digests.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "drunkgames/abm.hpp"
#include "drunkgames/basins.hpp"
#include "drunkgames/config.hpp"
#include "drunkgames/equilibria.hpp"
#include "drunkgames/io/csv.hpp"
#include "drunkgames/meanfield.hpp"
#include "drunkgames/parallel.hpp"
#include "drunkgames/payoff.hpp"

namespace drunk::experiments {

namespace fs = std::filesystem;
using config::Json;

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

inline constexpr std::array<std::string_view, 7> kFigures{"fig1", "fig2", "fig3", "fig4",
                                                          "fig5", "fig6", "fig7"};

struct ExperimentSpec {
  std::string figure;
  Json overrides = Json::object();
  fs::path out_dir = ".";
  std::uint64_t seed = kDefaultSeed;
  unsigned jobs = 0;
  bool full_scale = false;
};

struct ManifestEntry {
  std::string path;  // relative to out_dir
  std::string sha256;
  std::size_t bytes = 0;
};

struct Manifest {
  std::string figure;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> files;
};

inline Json manifest_to_json(const Manifest& m) {
  Json files = Json::array();
  for (const auto& f : m.files) {
    files.push_back(Json{{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  return Json{{"figure", m.figure}, {"seed", m.seed}, {"files", files}};
}

/// Collects output files; on destruction without commit() every file it
/// wrote is removed again, together with directories it created.
class OutputSet {
 public:
  OutputSet(fs::path root, std::string figure)
      : root_(std::move(root)), figure_(std::move(figure)) {
    const fs::path dir = root_ / figure_;
    std::error_code ec;
    if (!fs::exists(dir, ec)) {
      fs::create_directories(dir, ec);
      if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
      created_dir_ = true;
    }
  }

  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_) fs::remove_all(root_ / figure_, ec);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path rel = fs::path(figure_) / name;
    const fs::path full = root_ / rel;
    {
      std::ofstream os(full, std::ios::binary | std::ios::trunc);
      if (!os) throw Error(ErrorCode::io, "cannot open " + full.string() + " for writing");
      written_.push_back(full);
      os.write(content.data(), static_cast<std::streamsize>(content.size()));
      os.flush();
      if (!os) throw Error(ErrorCode::io, "write failed for " + full.string());
    }
    manifest_.files.push_back({rel.generic_string(), sha256_hex(content), content.size()});
  }

  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  template <class Fn>
  void write_csv(const std::string& name, Fn&& fill) {
    std::ostringstream os;
    fill(os);
    write(name, os.str());
  }

  Manifest commit(std::uint64_t seed) {
    manifest_.figure = figure_;
    manifest_.seed = seed;
    write_json("manifest.json", manifest_to_json(manifest_));
    committed_ = true;
    return manifest_;
  }

 private:
  fs::path root_;
  std::string figure_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<fs::path> written_;
  Manifest manifest_;
};

/// Applies overrides to defaults. Keys must already exist and keep their
/// JSON type (any number may replace any number).
inline Json merge_params(Json defaults, const Json& overrides) {
  if (!overrides.is_object()) {
    throw Error(ErrorCode::config, "overrides must be a JSON object");
  }
  for (const auto& [key, value] : overrides.items()) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::config, "unknown parameter '" + key + "'");
    }
    const Json& d = defaults[key];
    const bool same = (d.is_number() && value.is_number()) ||
                      (d.is_array() && value.is_array()) ||
                      (d.is_string() && value.is_string()) ||
                      (d.is_boolean() && value.is_boolean());
    if (!same) throw Error(ErrorCode::config, "parameter '" + key + "' has the wrong type");
    defaults[key] = value;
  }
  return defaults;
}

inline std::vector<double> numbers(const Json& j, const char* key) {
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw Error(ErrorCode::config, std::string(key) + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::size_t count_param(const Json& j, const char* key, std::size_t min = 1) {
  const double v = j.at(key).get<double>();
  if (!(v >= static_cast<double>(min)) || v != std::floor(v)) {
    throw Error(ErrorCode::config,
                std::string(key) + " must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

/// Defaults of every figure; full_scale selects the large sample counts and
/// grid sizes.
inline Json default_params(std::string_view figure, bool full_scale) {
  if (figure == "fig1") {
    return Json{{"grid", 41}, {"x0", 0.5}, {"t_max", 1000.0}, {"eps", 1e-3}, {"dt", 0.01}};
  }
  if (figure == "fig2") {
    return Json{{"kappa", 1.0},   {"mu", 0.5},      {"resolution", 21},
                {"starts", 4},    {"t_max", 100.0}, {"dt", 0.01},
                {"eps", 1e-3},    {"sample_every", 10}};
  }
  if (figure == "fig3") {
    return Json{{"s_values", {0.4, 0.5, 0.8}},
                {"kappa", 1.0},
                {"mu", 0.5},
                {"resolution", 21},
                {"starts", Json::array({Json::array({0.5, 0.25}), Json::array({0.3, 0.6})})},
                {"t_max", 300.0},
                {"dt", 0.01},
                {"eps", 1e-3},
                {"sample_every", 10}};
  }
  if (figure == "fig4") {
    return Json{{"S1", -1.0},
                {"T1", 2.0},
                {"grid", full_scale ? 41 : 21},
                {"kappas", {0.1, 1.0, 10.0}},
                {"samples", full_scale ? 1000 : 100},
                {"eps", 1e-3},
                {"t_max", 1e4},
                {"dt", 0.01}};
  }
  if (figure == "fig5") {
    return Json{{"field_s1", {0.25, 0.5, 0.75}},
                {"resolution", 21},
                {"s1_points", 21},
                {"kappas", {0.1, 1.0, 10.0}},
                {"samples", full_scale ? 1000 : 100},
                {"eps", 1e-3},
                {"t_max", 1e4},
                {"dt", 0.01}};
  }
  if (figure == "fig6") {
    return Json{{"s_min", 0.3},
                {"s_max", 0.9},
                {"delta_min", 0.0},
                {"delta_max", 0.5},
                {"grid", 21},
                {"N", full_scale ? 10000 : 1000},
                {"rounds", full_scale ? 10000 : 1000},
                {"beta", 0.1},
                {"kappa", 0.1},
                {"mu", 0.5},
                {"x0", 0.5},
                {"perception_mode", "expected"},
                {"tail_fraction", 0.1}};
  }
  if (figure == "fig7") {
    return Json{{"points", Json::array({Json::array({0.4, 0.04}), Json::array({0.8, 0.04}),
                                        Json::array({0.4, 0.4})})},
                {"N", 10000},
                {"rounds", 5000},
                {"beta", 0.1},
                {"kappa", 0.1},
                {"mu", 0.5},
                {"x0", 0.5},
                {"perception_mode", "expected"}};
  }
  throw Error(ErrorCode::config, "unknown figure '" + std::string(figure) + "'");
}

// ---------------------------------------------------------------- fig1

struct SingleGameOutcome {
  double x = 0.0;          // converged target, or the last state
  Termination termination = Termination::max_time;
  bool on_separatrix = false;  // settled on an unstable equilibrium
};

/// Integrates the single game m from (x0, 0) with alpha frozen, stopping at
/// any single-game equilibrium.
inline SingleGameOutcome single_game_outcome(const PayoffMatrix& m, double x0,
                                             const IntegrateOptions& opt) {
  const DrunkGame dg{m, m, 1.0, QPoly::zero()};
  std::vector<State> targets;
  std::vector<Stability> stab;
  const FearGreed fg = fear_greed(m);
  if (!(fg.fear == 0.0 && fg.greed == 0.0)) {
    for (const auto& eq : single_game_fixed_points(m)) {
      targets.push_back({eq.x, 0.0});
      stab.push_back(eq.stability);
    }
  }
  IntegrateOptions o = opt;
  o.keep_samples = false;
  const Trajectory tr = integrate(dg, {x0, 0.0}, targets, o);
  SingleGameOutcome out;
  out.termination = tr.termination;
  if (tr.termination == Termination::converged) {
    out.x = tr.target->x;
    out.on_separatrix = stab[*tr.target_index] == Stability::unstable;
  } else {
    out.x = tr.final_state().x;
  }
  return out;
}

struct Fig1Cell {
  double S = 0.0;
  double T = 0.0;
  SingleGameOutcome outcome;
};

inline std::vector<Fig1Cell> fig1_grid(std::size_t n, double x0, const IntegrateOptions& opt,
                                       unsigned jobs) {
  const auto s_grid = linspace(-1.0, 1.0, n);
  const auto t_grid = linspace(0.0, 2.0, n);
  std::vector<Fig1Cell> cells;
  for (double t : t_grid) {
    for (double s : s_grid) cells.push_back({s, t, {}});
  }
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    cells[i].outcome = single_game_outcome(PayoffMatrix::standard(cells[i].S, cells[i].T), x0, opt);
  });
  return cells;
}

// ---------------------------------------------------------------- fig6

struct HeatmapParams {
  AbmConfig base;  // N, beta, kappa, mu, x0, t_max, mode
  double tail_fraction = 0.1;
};

/// One drunk-prisoner ABM run per (s, delta0); the cell seed comes from
/// the master seed and the grid coordinates.
inline std::vector<io::HeatmapCell> abm_heatmap(const std::vector<double>& s_grid,
                                                const std::vector<double>& delta_grid,
                                                const HeatmapParams& hp, unsigned jobs) {
  std::vector<io::HeatmapCell> cells;
  std::vector<std::array<std::uint64_t, 2>> coords;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < delta_grid.size(); ++j) {
      cells.push_back({s_grid[i], delta_grid[j], 0.0, 0.0});
      coords.push_back({i, j});
    }
  }
  parallel_for(cells.size(), jobs, [&](std::size_t k) {
    AbmConfig cfg = hp.base;
    cfg.with_heterogeneity(cells[k].delta0);
    cfg.seed = derive_seed(hp.base.seed, {coords[k][0], coords[k][1]});
    const DrunkGame dg = presets::drunk_prisoner(cells[k].s, cfg.kappa, cfg.mu);
    const AbmRun run = run_abm(cfg, dg);
    cells[k].dist_interior_avg = tail_mean_distance(run, hp.tail_fraction);
    cells[k].delta_alpha_final = run.series.back().delta_alpha;
  });
  return cells;
}

// ---------------------------------------------------------------- runner

namespace detail {

inline std::string num_tag(double v) {
  std::string s = io::format_double(v);
  for (char& c : s) {
    if (c == '-') c = 'm';
  }
  return s;
}

inline IntegrateOptions integrate_options(const Json& p) {
  IntegrateOptions o;
  o.dt = p.at("dt").get<double>();
  o.t_max = p.at("t_max").get<double>();
  o.eps = p.at("eps").get<double>();
  if (p.contains("sample_every")) o.sample_every = static_cast<int>(count_param(p, "sample_every"));
  return o;
}

inline MonteCarloParams mc_params(const Json& p, std::uint64_t seed, unsigned jobs) {
  MonteCarloParams mc;
  mc.n_samples = count_param(p, "samples");
  mc.seed = seed;
  mc.eps = p.at("eps").get<double>();
  mc.t_max = p.at("t_max").get<double>();
  mc.dt = p.at("dt").get<double>();
  mc.jobs = jobs;
  return mc;
}

/// Trajectories from each start; one CSV with an id column.
inline std::string trajectories_csv(const DrunkGame& dg, const std::vector<State>& starts,
                                    const IntegrateOptions& opt) {
  std::ostringstream os;
  io::CsvWriter w(os);
  w.header({"id", "t", "x", "alpha", "termination"});
  const auto targets = stable_states(dg);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const Trajectory tr = integrate(dg, starts[i], targets, opt);
    for (const auto& s : tr.samples) {
      w.cell(i).cell(s.t).cell(s.state.x).cell(s.state.alpha).cell(to_string(tr.termination));
      w.end_row();
    }
  }
  return os.str();
}

inline std::string field_csv(const DrunkGame& dg, int n) {
  std::ostringstream os;
  io::write_field(os, field_grid(dg, n));
  return os.str();
}

inline AbmConfig abm_base(const Json& p, std::uint64_t seed) {
  AbmConfig c;
  c.N = count_param(p, "N", 2);
  c.t_max = count_param(p, "rounds");
  c.beta = p.at("beta").get<double>();
  c.kappa = p.at("kappa").get<double>();
  c.mu = p.at("mu").get<double>();
  c.x0 = p.at("x0").get<double>();
  c.perception_mode = parse_perception_mode(p.at("perception_mode").get<std::string>());
  c.seed = seed;
  return c;
}

inline void run_fig1(OutputSet& out, const Json& p, const ExperimentSpec& spec) {
  IntegrateOptions opt;
  opt.dt = p.at("dt").get<double>();
  opt.t_max = p.at("t_max").get<double>();
  opt.eps = p.at("eps").get<double>();
  const auto cells = fig1_grid(count_param(p, "grid", 2), p.at("x0").get<double>(), opt, spec.jobs);
  out.write_csv("cooperation.csv", [&](std::ostream& os) {
    io::CsvWriter w(os);
    w.header({"T", "S", "cooperation", "termination", "on_separatrix"});
    for (const auto& c : cells) {
      w.cell(c.T).cell(c.S).cell(c.outcome.x).cell(to_string(c.outcome.termination));
      w.cell(c.outcome.on_separatrix ? 1 : 0).end_row();
    }
  });
}

inline std::vector<State> start_grid(std::size_t k) {
  std::vector<State> out;
  for (std::size_t i = 1; i <= k; ++i) {
    for (std::size_t j = 1; j <= k; ++j) {
      out.push_back({static_cast<double>(i) / static_cast<double>(k + 1),
                     static_cast<double>(j) / static_cast<double>(k + 1)});
    }
  }
  return out;
}

inline void run_fig2(OutputSet& out, const Json& p) {
  const DrunkGame dg = presets::pub_dilemma(p.at("kappa").get<double>(), p.at("mu").get<double>());
  const int res = static_cast<int>(count_param(p, "resolution", 2));
  out.write("field.csv", field_csv(dg, res));
  out.write_json("equilibria.json", config::equilibria_to_json(fixed_points(dg)));
  out.write("trajectories.csv",
            trajectories_csv(dg, start_grid(count_param(p, "starts")), integrate_options(p)));
}

inline void run_fig3(OutputSet& out, const Json& p) {
  std::vector<State> starts;
  for (const auto& s : p.at("starts")) {
    if (!s.is_array() || s.size() != 2) {
      throw Error(ErrorCode::config, "starts must be a list of [x, alpha] pairs");
    }
    starts.push_back({s[0].get<double>(), s[1].get<double>()});
  }
  const int res = static_cast<int>(count_param(p, "resolution", 2));
  const auto opt = integrate_options(p);
  for (double s : numbers(p, "s_values")) {
    const DrunkGame dg =
        presets::drunk_prisoner(s, p.at("kappa").get<double>(), p.at("mu").get<double>());
    const std::string tag = "_s" + num_tag(s);
    out.write("field" + tag + ".csv", field_csv(dg, res));
    out.write_json("equilibria" + tag + ".json", config::equilibria_to_json(fixed_points(dg)));
    out.write("trajectories" + tag + ".csv", trajectories_csv(dg, starts, opt));
  }
}

inline void run_fig4(OutputSet& out, const Json& p, const ExperimentSpec& spec) {
  const std::size_t n = count_param(p, "grid");
  const PayoffMatrix g1 =
      PayoffMatrix::standard(p.at("S1").get<double>(), p.at("T1").get<double>());
  const SweepDataset ds = sweep_g2_grid(g1, linspace(-1.0, 1.0, n), linspace(0.0, 2.0, n),
                                        numbers(p, "kappas"), mc_params(p, spec.seed, spec.jobs));
  out.write_csv("sweep.csv", [&](std::ostream& os) { io::write_sweep(os, ds); });
}

inline void run_fig5(OutputSet& out, const Json& p, const ExperimentSpec& spec) {
  const int res = static_cast<int>(count_param(p, "resolution", 2));
  for (double s1 : numbers(p, "field_s1")) {
    const DrunkGame dg = presets::battle(s1);
    const std::string tag = "_s1_" + num_tag(s1);
    out.write("field" + tag + ".csv", field_csv(dg, res));
    out.write_json("equilibria" + tag + ".json", config::equilibria_to_json(fixed_points(dg)));
  }
  const SweepDataset ds =
      sweep_battle_line(linspace(0.0, 1.0, count_param(p, "s1_points", 2)), numbers(p, "kappas"),
                        mc_params(p, spec.seed, spec.jobs));
  out.write_csv("sweep.csv", [&](std::ostream& os) { io::write_sweep(os, ds); });
  Json jumps = Json::array();
  for (double k : ds.kappas) {
    const JumpReport r = largest_jump(ds, k);
    jumps.push_back(Json{{"kappa", k},
                         {"from", r.from},
                         {"to", r.to},
                         {"size", r.size},
                         {"non_decreasing", r.non_decreasing},
                         {"max_decrease", r.max_decrease}});
  }
  out.write_json("jumps.json", jumps);
}

inline void run_fig6(OutputSet& out, const Json& p, const ExperimentSpec& spec) {
  const std::size_t n = count_param(p, "grid");
  HeatmapParams hp;
  hp.base = abm_base(p, spec.seed);
  hp.tail_fraction = p.at("tail_fraction").get<double>();
  const auto cells =
      abm_heatmap(linspace(p.at("s_min").get<double>(), p.at("s_max").get<double>(), n),
                  linspace(p.at("delta_min").get<double>(), p.at("delta_max").get<double>(), n),
                  hp, spec.jobs);
  out.write_csv("heatmap.csv", [&](std::ostream& os) { io::write_heatmap(os, cells); });
}

inline void run_fig7(OutputSet& out, const Json& p, const ExperimentSpec& spec) {
  const AbmConfig base = abm_base(p, spec.seed);
  std::vector<std::pair<double, double>> points;
  for (const auto& v : p.at("points")) {
    if (!v.is_array() || v.size() != 2) {
      throw Error(ErrorCode::config, "points must be a list of [s, delta0] pairs");
    }
    points.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  std::vector<AbmRun> runs(points.size());
  parallel_for(points.size(), spec.jobs, [&](std::size_t k) {
    AbmConfig cfg = base;
    cfg.with_heterogeneity(points[k].second);
    cfg.seed = derive_seed(base.seed, {k});
    runs[k] = run_abm(cfg, presets::drunk_prisoner(points[k].first, cfg.kappa, cfg.mu));
  });
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const std::string name = std::string("run_") + static_cast<char>('a' + k) + ".csv";
    out.write_csv(name, [&](std::ostream& os) { io::write_abm_stats(os, runs[k].series); });
  }
}

}  // namespace detail

/// Resolved parameters for an experiment: defaults plus overrides.
inline Json resolve_params(const ExperimentSpec& spec) {
  return merge_params(default_params(spec.figure, spec.full_scale), spec.overrides);
}

/// Runs one figure pipeline. On any failure the files written so far are
/// removed and the error is rethrown.
inline Manifest reproduce(const ExperimentSpec& spec) {
  const Json params = resolve_params(spec);
  OutputSet out(spec.out_dir, spec.figure);
  out.write_json("params.json", Json{{"figure", spec.figure},
                                     {"seed", spec.seed},
                                     {"full_scale", spec.full_scale},
                                     {"params", params}});
  try {
    if (spec.figure == "fig1") detail::run_fig1(out, params, spec);
    else if (spec.figure == "fig2") detail::run_fig2(out, params);
    else if (spec.figure == "fig3") detail::run_fig3(out, params);
    else if (spec.figure == "fig4") detail::run_fig4(out, params, spec);
    else if (spec.figure == "fig5") detail::run_fig5(out, params, spec);
    else if (spec.figure == "fig6") detail::run_fig6(out, params, spec);
    else if (spec.figure == "fig7") detail::run_fig7(out, params, spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("bad parameter: ") + e.what());
  }
  return out.commit(spec.seed);
}

}  // namespace drunk::experiments
