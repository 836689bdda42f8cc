#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drunkgames/abm.hpp"
#include "drunkgames/basins.hpp"
#include "drunkgames/config.hpp"
#include "drunkgames/equilibria.hpp"
#include "drunkgames/experiments.hpp"
#include "drunkgames/io/csv.hpp"
#include "drunkgames/meanfield.hpp"
#include "drunkgames/payoff.hpp"

#ifndef DRUNKGAMES_VERSION
#define DRUNKGAMES_VERSION "0.0.0"
#endif

namespace drunk::cli {
namespace {

using config::Json;

/// Usage problems found after CLI11 parsing (bad combinations, ranges).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config::ConfigError("cannot read file", path, 0);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

DrunkGame load_game(const std::string& path) {
  return config::parse_game_config(read_file(path)).resolve();
}

/// Writes `content` to `path`, or to `out` when path is "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    out.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  os << content;
  os.flush();
  if (!os) throw Error(ErrorCode::io, "write failed for " + path);
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::config:
    case ErrorCode::unknown_preset:
    case ErrorCode::invalid_matrix:
      return kConfig;
    default:
      return kRuntime;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary dynamics of drunk games", "drunk"};
  app.set_version_flag("--version", std::string(DRUNKGAMES_VERSION));
  app.require_subcommand(1);
  unsigned jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);

  // classify
  auto* classify = app.add_subcommand("classify", "Classify a game by its T and S payoffs");
  double cl_t = 0.0, cl_s = 0.0, cl_r = 1.0, cl_p = 0.0;
  classify->add_option("--T", cl_t, "Temptation")->required();
  classify->add_option("--S", cl_s, "Sucker's payoff")->required();
  classify->add_option("--R", cl_r, "Reward")->capture_default_str();
  classify->add_option("--P", cl_p, "Punishment")->capture_default_str();

  // field
  auto* field = app.add_subcommand("field", "Vector field on a regular grid");
  std::string cfg_path;
  std::string out_path = "-";
  int resolution = 21;
  field->add_option("--config", cfg_path, "Game configuration JSON")->required();
  field->add_option("--resolution", resolution, "Points per axis")->check(CLI::Range(2, 100000))->capture_default_str();
  field->add_option("--out", out_path, "Output CSV ('-' for stdout)")->capture_default_str();

  // trajectory
  auto* trajectory = app.add_subcommand("trajectory", "Integrate one trajectory");
  double x0 = 0.5, alpha0 = 0.5;
  IntegrateOptions iopt;
  iopt.t_max = 100.0;
  trajectory->add_option("--config", cfg_path, "Game configuration JSON")->required();
  trajectory->add_option("--x0", x0, "Initial cooperator fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  trajectory->add_option("--alpha0", alpha0, "Initial perception")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  trajectory->add_option("--dt", iopt.dt, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
  trajectory->add_option("--t-max", iopt.t_max, "Time horizon")->check(CLI::PositiveNumber)->capture_default_str();
  trajectory->add_option("--eps", iopt.eps, "Convergence radius")->check(CLI::PositiveNumber)->capture_default_str();
  trajectory->add_option("--sample-every", iopt.sample_every, "Steps between samples")->check(CLI::PositiveNumber)->capture_default_str();
  trajectory->add_option("--out", out_path, "Output CSV ('-' for stdout)")->capture_default_str();

  // equilibria
  auto* equilibria = app.add_subcommand("equilibria", "Fixed points and their stability");
  equilibria->add_option("--config", cfg_path, "Game configuration JSON")->required();
  equilibria->add_option("--out", out_path, "Output JSON ('-' for stdout)")->capture_default_str();

  // basin
  auto* basin = app.add_subcommand("basin", "Monte Carlo attractiveness of full cooperation");
  MonteCarloParams mc;
  basin->add_option("--config", cfg_path, "Game configuration JSON")->required();
  basin->add_option("--samples", mc.n_samples, "Number of initial states")->check(CLI::PositiveNumber)->capture_default_str();
  basin->add_option("--seed", mc.seed, "Master seed")->capture_default_str();
  basin->add_option("--eps", mc.eps, "Convergence radius")->check(CLI::PositiveNumber)->capture_default_str();
  basin->add_option("--t-max", mc.t_max, "Time horizon")->check(CLI::PositiveNumber)->capture_default_str();
  basin->add_option("--dt", mc.dt, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
  basin->add_flag("--keep-samples", mc.keep_samples, "Include per-sample records");
  basin->add_option("--out", out_path, "Output JSON ('-' for stdout)")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Attractiveness sweeps");
  std::string sweep_kind;
  std::vector<double> kappas{0.1, 1.0, 10.0};
  std::size_t grid = 21;
  std::size_t sweep_samples = 100;
  std::uint64_t seed = kDefaultSeed;
  sweep->add_option("kind", sweep_kind, "pub: (S2, T2) grid against PD(S=-1, T=2); battle: S1 line")
      ->required()
      ->check(CLI::IsMember({"pub", "battle"}));
  sweep->add_option("--kappas", kappas, "Comma separated kappa values")->delimiter(',')->capture_default_str();
  sweep->add_option("--grid", grid, "Points per axis")->check(CLI::Range(std::size_t{2}, std::size_t{10000}))->capture_default_str();
  sweep->add_option("--samples", sweep_samples, "Samples per cell")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--seed", seed, "Master seed")->capture_default_str();
  sweep->add_option("--out", out_path, "Output CSV ('-' for stdout)")->capture_default_str();

  // abm
  auto* abm = app.add_subcommand("abm", "Agent-based simulation");
  std::string abm_path;
  std::optional<std::uint64_t> abm_seed;
  abm->add_option("--abm-config", abm_path, "ABM configuration JSON")->required();
  abm->add_option("--seed", abm_seed, "Override the configured seed");
  abm->add_option("--out", out_path, "Output CSV ('-' for stdout)")->capture_default_str();

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate the datasets behind a figure");
  std::string figure;
  std::string out_dir = "results";
  bool full_scale = false;
  std::vector<std::string> sets;
  std::string params_path;
  reproduce->add_option("figure", figure, "fig1 ... fig7")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}));
  reproduce->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  reproduce->add_option("--seed", seed, "Master seed")->capture_default_str();
  reproduce->add_flag("--full-scale", full_scale, "Use full-scale sample sizes and grids");
  reproduce->add_option("--set", sets, "Parameter override key=value (value in JSON)");
  reproduce->add_option("--params", params_path, "JSON object of parameter overrides");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("drunk");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (classify->parsed()) {
      const PayoffMatrix m{cl_r, cl_s, cl_t, cl_p};
      m.validate();
      out << classify_game(m).label() << '\n';
      return kOk;
    }
    if (field->parsed()) {
      const DrunkGame dg = load_game(cfg_path);
      std::ostringstream os;
      io::write_field(os, field_grid(dg, resolution));
      emit(out_path, os.str(), out);
      return kOk;
    }
    if (trajectory->parsed()) {
      const DrunkGame dg = load_game(cfg_path);
      const auto targets = stable_states(dg);
      const Trajectory tr = integrate(dg, {x0, alpha0}, targets, iopt);
      std::ostringstream os;
      io::write_trajectory(os, tr);
      emit(out_path, os.str(), out);
      err << "termination: " << to_string(tr.termination) << '\n';
      return kOk;
    }
    if (equilibria->parsed()) {
      const DrunkGame dg = load_game(cfg_path);
      emit(out_path, config::equilibria_to_json(fixed_points(dg)).dump(2) + "\n", out);
      return kOk;
    }
    if (basin->parsed()) {
      const DrunkGame dg = load_game(cfg_path);
      mc.jobs = jobs;
      emit(out_path, config::basin_to_json(estimate_attractiveness(dg, mc)).dump(2) + "\n", out);
      return kOk;
    }
    if (sweep->parsed()) {
      MonteCarloParams smc;
      smc.n_samples = sweep_samples;
      smc.seed = seed;
      smc.jobs = jobs;
      const SweepDataset ds =
          sweep_kind == "pub"
              ? sweep_g2_grid(PayoffMatrix::standard(-1.0, 2.0), linspace(-1.0, 1.0, grid),
                              linspace(0.0, 2.0, grid), kappas, smc)
              : sweep_battle_line(linspace(0.0, 1.0, grid), kappas, smc);
      std::ostringstream os;
      io::write_sweep(os, ds);
      emit(out_path, os.str(), out);
      if (sweep_kind == "battle") {
        for (double k : kappas) {
          const JumpReport r = largest_jump(ds, k);
          err << "kappa " << k << ": largest jump " << r.size << " between S1=" << r.from
              << " and S1=" << r.to << '\n';
        }
      }
      return kOk;
    }
    if (abm->parsed()) {
      config::AbmConfigFile f = config::parse_abm_config(read_file(abm_path));
      if (abm_seed) f.abm.seed = *abm_seed;
      const AbmRun run = run_abm(f.abm, f.game.resolve());
      std::ostringstream os;
      io::write_abm_stats(os, run.series);
      emit(out_path, os.str(), out);
      return kOk;
    }
    if (reproduce->parsed()) {
      experiments::ExperimentSpec spec;
      spec.figure = figure;
      spec.out_dir = out_dir;
      spec.seed = seed;
      spec.jobs = jobs;
      spec.full_scale = full_scale;
      if (!params_path.empty()) {
        const std::string text = read_file(params_path);
        spec.overrides = config::detail::parse_text(text);
        if (!spec.overrides.is_object()) {
          throw config::ConfigError("expected an object", "/", 1);
        }
      }
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw UsageError("--set expects key=value, got '" + s + "'");
        }
        const std::string value = s.substr(eq + 1);
        try {
          spec.overrides[s.substr(0, eq)] = Json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
          throw UsageError("--set value is not JSON: '" + value + "'");
        }
      }
      const auto manifest = experiments::reproduce(spec);
      for (const auto& f : manifest.files) out << f.sha256 << "  " << f.path << '\n';
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace drunk::cli
