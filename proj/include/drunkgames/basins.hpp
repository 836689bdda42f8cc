#pragma once

// Monte Carlo estimate of the attractiveness of cooperation: the fraction
// of uniformly drawn initial states whose trajectory reaches (1, 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drunkgames/drunk_game.hpp"
#include "drunkgames/error.hpp"
#include "drunkgames/meanfield.hpp"
#include "drunkgames/parallel.hpp"
#include "drunkgames/rng.hpp"

namespace drunk {

struct MonteCarloParams {
  std::size_t n_samples = 1000;
  std::uint64_t seed = kDefaultSeed;
  double eps = 1e-3;
  double t_max = 1e4;
  double dt = 0.01;
  unsigned jobs = 0;  // 0 = hardware concurrency
  bool keep_samples = false;
};

struct SampleRecord {
  State initial;
  Termination termination = Termination::max_time;
  bool cooperative = false;
};

struct BasinResult {
  double attractiveness = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_cooperative = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  double t_max = 0.0;
  double dt = 0.0;
  std::vector<SampleRecord> samples;  // only with keep_samples

  friend bool operator==(const BasinResult& a, const BasinResult& b) {
    return a.attractiveness == b.attractiveness && a.n_samples == b.n_samples &&
           a.n_cooperative == b.n_cooperative && a.seed == b.seed &&
           a.eps == b.eps && a.t_max == b.t_max && a.dt == b.dt;
  }
};

inline constexpr State kFullCooperation{1.0, 1.0};

/// Initial state of sample `index` in the stream seeded by `seed`.
inline State sample_initial_state(std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, {index}));
  const double x = rng.uniform();
  const double a = rng.uniform();
  return {x, a};
}

inline SampleRecord run_basin_sample(const DrunkGame& dg,
                                     const MonteCarloParams& mc,
                                     std::uint64_t index) {
  SampleRecord rec;
  rec.initial = sample_initial_state(mc.seed, index);
  IntegrateOptions opt;
  opt.dt = mc.dt;
  opt.t_max = mc.t_max;
  opt.eps = mc.eps;
  opt.keep_samples = false;
  const std::array<State, 1> targets{kFullCooperation};
  const Trajectory tr = integrate(dg, rec.initial, targets, opt);
  rec.termination = tr.termination;
  rec.cooperative = tr.termination == Termination::converged;
  return rec;
}

/// Samples are processed in parallel; each uses its own index-derived
/// stream, so the result does not depend on the worker count.
inline BasinResult estimate_attractiveness(const DrunkGame& dg,
                                           const MonteCarloParams& mc = {}) {
  dg.validate();
  if (mc.n_samples < 1) {
    throw Error(ErrorCode::invalid_parameter, "n_samples must be at least 1");
  }
  std::vector<SampleRecord> records(mc.n_samples);
  parallel_for(mc.n_samples, mc.jobs, [&](std::size_t i) {
    records[i] = run_basin_sample(dg, mc, i);
  });
  BasinResult r;
  r.n_samples = mc.n_samples;
  for (const auto& rec : records) r.n_cooperative += rec.cooperative ? 1 : 0;
  r.attractiveness =
      static_cast<double>(r.n_cooperative) / static_cast<double>(r.n_samples);
  r.seed = mc.seed;
  r.eps = mc.eps;
  r.t_max = mc.t_max;
  r.dt = mc.dt;
  if (mc.keep_samples) r.samples = std::move(records);
  return r;
}

struct SweepCell {
  std::vector<double> params;  // values in axis order
  double kappa = 1.0;
  BasinResult result;
};

struct SweepDataset {
  std::vector<std::string> axis_names;
  std::vector<std::vector<double>> grids;
  std::vector<double> kappas;
  std::vector<SweepCell> cells;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

namespace detail {

inline void check_kappas(const std::vector<double>& kappas) {
  if (kappas.empty()) {
    throw Error(ErrorCode::invalid_parameter, "sweep needs at least one kappa");
  }
  for (double k : kappas) {
    if (!(k > 0.0)) throw Error(ErrorCode::invalid_parameter, "kappa must be positive");
  }
}

/// Evaluates the cells in parallel. Each cell's seed comes from the master
/// seed and the cell's grid coordinates, excluding kappa, so every kappa
/// sees the same initial states.
template <class MakeGame>
void run_cells(SweepDataset& ds, const std::vector<std::vector<std::uint64_t>>& coords,
               const MonteCarloParams& mc, MakeGame&& make_game) {
  parallel_for(ds.cells.size(), mc.jobs, [&](std::size_t i) {
    auto& cell = ds.cells[i];
    MonteCarloParams local = mc;
    local.jobs = 1;
    std::uint64_t seed = mc.seed;
    for (auto c : coords[i]) seed = derive_seed(seed, {c});
    local.seed = seed;
    cell.result = estimate_attractiveness(make_game(cell), local);
  });
}

}  // namespace detail

/// Generalized coupling: fixed g1 against g2 = (S2, T2) with q = x - 0.5.
inline SweepDataset sweep_g2_grid(const PayoffMatrix& g1,
                                  const std::vector<double>& s2_grid,
                                  const std::vector<double>& t2_grid,
                                  const std::vector<double>& kappas,
                                  const MonteCarloParams& mc) {
  g1.validate();
  detail::check_kappas(kappas);
  for (double s : s2_grid) {
    if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorCode::invalid_parameter, "S2 outside [-1, 1]");
  }
  for (double t : t2_grid) {
    if (!(t >= 0.0 && t <= 2.0)) throw Error(ErrorCode::invalid_parameter, "T2 outside [0, 2]");
  }
  SweepDataset ds;
  ds.axis_names = {"S2", "T2"};
  ds.grids = {s2_grid, t2_grid};
  ds.kappas = kappas;
  std::vector<std::vector<std::uint64_t>> coords;
  for (double k : kappas) {
    for (std::size_t i = 0; i < s2_grid.size(); ++i) {
      for (std::size_t j = 0; j < t2_grid.size(); ++j) {
        ds.cells.push_back({{s2_grid[i], t2_grid[j]}, k, {}});
        coords.push_back({i, j});
      }
    }
  }
  detail::run_cells(ds, coords, mc, [&](const SweepCell& c) {
    return make_drunk_game(g1, PayoffMatrix::standard(c.params[0], c.params[1]),
                           c.kappa, QPoly::linear(0.5));
  });
  return ds;
}

inline SweepDataset sweep_battle_line(const std::vector<double>& s1_grid,
                                      const std::vector<double>& kappas,
                                      const MonteCarloParams& mc) {
  detail::check_kappas(kappas);
  SweepDataset ds;
  ds.axis_names = {"S1"};
  ds.grids = {s1_grid};
  ds.kappas = kappas;
  std::vector<std::vector<std::uint64_t>> coords;
  for (double k : kappas) {
    for (std::size_t i = 0; i < s1_grid.size(); ++i) {
      ds.cells.push_back({{s1_grid[i]}, k, {}});
      coords.push_back({i});
    }
  }
  detail::run_cells(ds, coords, mc, [](const SweepCell& c) {
    return presets::battle(c.params[0], c.kappa);
  });
  return ds;
}

/// Mean attractiveness over all cells with the given kappa.
inline double mean_attractiveness(const SweepDataset& ds, double kappa) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : ds.cells) {
    if (c.kappa == kappa) {
      sum += c.result.attractiveness;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::invalid_parameter, "no cells for this kappa");
  return sum / static_cast<double>(n);
}

struct JumpReport {
  double kappa = 0.0;
  double from = 0.0;  // grid value before the jump
  double to = 0.0;    // grid value after the jump
  double size = 0.0;  // largest single-step increase
  bool non_decreasing = true;
  double max_decrease = 0.0;
};

/// Largest single-step increase along a one-axis sweep at one kappa.
inline JumpReport largest_jump(const SweepDataset& ds, double kappa) {
  if (ds.grids.size() != 1) {
    throw Error(ErrorCode::invalid_parameter, "largest_jump needs a line sweep");
  }
  std::vector<const SweepCell*> line;
  for (const auto& c : ds.cells) {
    if (c.kappa == kappa) line.push_back(&c);
  }
  JumpReport rep;
  rep.kappa = kappa;
  rep.size = -1.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const double d = line[i]->result.attractiveness - line[i - 1]->result.attractiveness;
    if (d > rep.size) {
      rep.size = d;
      rep.from = line[i - 1]->params[0];
      rep.to = line[i]->params[0];
    }
    if (d < 0.0) {
      rep.non_decreasing = false;
      rep.max_decrease = std::max(rep.max_decrease, -d);
    }
  }
  if (line.size() < 2) rep.size = 0.0;
  return rep;
}

}  // namespace drunk
