#pragma once

// Finite well-mixed population playing a drunk game. Every round each agent
// plays every other agent, strategies update synchronously by the local
// replicator rule and perceptions follow the population cooperation level.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drunkgames/drunk_game.hpp"
#include "drunkgames/equilibria.hpp"
#include "drunkgames/error.hpp"
#include "drunkgames/meanfield.hpp"
#include "drunkgames/rng.hpp"

namespace drunk {

enum class Strategy : std::uint8_t { D = 0, C = 1 };

/// How an agent's payoff matrix is chosen each round.
enum class PerceptionMode {
  per_round,        // one draw per agent per round
  per_interaction,  // one draw per opponent, O(N^2)
  expected,         // alpha-weighted mixture of the two matrices
};

constexpr std::string_view to_string(PerceptionMode m) noexcept {
  switch (m) {
    case PerceptionMode::per_round: return "per_round";
    case PerceptionMode::per_interaction: return "per_interaction";
    case PerceptionMode::expected: return "expected";
  }
  return "?";
}

inline PerceptionMode parse_perception_mode(std::string_view s) {
  if (s == "per_round") return PerceptionMode::per_round;
  if (s == "per_interaction") return PerceptionMode::per_interaction;
  if (s == "expected") return PerceptionMode::expected;
  throw Error(ErrorCode::invalid_parameter,
              "unknown perception mode '" + std::string(s) + "'");
}

/// Signal driving the alpha update.
enum class AlphaRule {
  population_mean,        // x_bar - mu, shared by all agents
  individual_experience,  // own beer share b_T - mu
};

constexpr std::string_view to_string(AlphaRule r) noexcept {
  return r == AlphaRule::population_mean ? "population_mean"
                                         : "individual_experience";
}

inline AlphaRule parse_alpha_rule(std::string_view s) {
  if (s == "population_mean") return AlphaRule::population_mean;
  if (s == "individual_experience") return AlphaRule::individual_experience;
  throw Error(ErrorCode::invalid_parameter,
              "unknown alpha rule '" + std::string(s) + "'");
}

struct Agent {
  Strategy strategy = Strategy::D;
  double alpha = 0.0;
  int group = 1;  // 1 or 2, fixed for the run
};

struct AbmConfig {
  std::size_t N = 10000;
  double beta = 0.1;
  double kappa = 0.1;
  double mu = 0.5;
  double x0 = 0.5;
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double split = 0.5;
  std::size_t t_max = 10000;
  std::uint64_t seed = kDefaultSeed;
  PerceptionMode perception_mode = PerceptionMode::expected;
  AlphaRule alpha_rule = AlphaRule::population_mean;
  bool allow_large_per_interaction = false;

  /// Two equal groups at 0.5 (1 -+ delta0): mean 0.5 and heterogeneity
  /// exactly delta0.
  AbmConfig& with_heterogeneity(double delta0) {
    if (!(delta0 >= 0.0 && delta0 <= 1.0)) {
      throw Error(ErrorCode::invalid_parameter, "delta0 must lie in [0, 1]");
    }
    alpha1 = 0.5 * (1.0 - delta0);
    alpha2 = 0.5 * (1.0 + delta0);
    split = 0.5;
    return *this;
  }

  void validate() const {
    auto fail = [](const char* what) {
      throw Error(ErrorCode::invalid_parameter, what);
    };
    if (N < 2) fail("N must be at least 2");
    if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0, 1)");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) fail("kappa must be positive");
    if (!(mu > 0.0 && mu < 1.0)) fail("mu must lie in (0, 1)");
    if (!(x0 >= 0.0 && x0 <= 1.0)) fail("x0 must lie in [0, 1]");
    if (!(alpha1 >= 0.0 && alpha1 <= alpha2 && alpha2 <= 1.0)) {
      fail("need 0 <= alpha1 <= alpha2 <= 1");
    }
    if (!(split >= 0.0 && split <= 1.0)) fail("split must lie in [0, 1]");
  }
};

class Population {
 public:
  Population() = default;
  explicit Population(std::vector<Agent> agents) : agents_(std::move(agents)) {
    recount();
  }

  std::size_t size() const noexcept { return agents_.size(); }
  std::span<const Agent> agents() const noexcept { return agents_; }
  const Agent& operator[](std::size_t i) const { return agents_[i]; }

  std::size_t cooperators() const noexcept { return coop_; }
  std::size_t cooperators_in(int group) const noexcept {
    return coop_by_group_[group == 1 ? 0 : 1];
  }
  std::size_t group_size(int group) const noexcept {
    return size_by_group_[group == 1 ? 0 : 1];
  }
  double cooperator_fraction() const noexcept {
    return static_cast<double>(coop_) / static_cast<double>(agents_.size());
  }

  double mean_alpha() const noexcept {
    double s = 0.0;
    for (const auto& a : agents_) s += a.alpha;
    return agents_.empty() ? 0.0 : s / static_cast<double>(agents_.size());
  }

  /// Mean alpha of a group, NaN when the group is empty.
  double mean_alpha(int group) const noexcept {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& a : agents_) {
      if (a.group == group) {
        s += a.alpha;
        ++n;
      }
    }
    return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : s / static_cast<double>(n);
  }

  /// True when the cached counts match a fresh count.
  bool counts_consistent() const {
    Population copy = *this;
    copy.recount();
    return copy.coop_ == coop_ && copy.coop_by_group_ == coop_by_group_ &&
           copy.size_by_group_ == size_by_group_;
  }

  void set_strategy(std::size_t i, Strategy s) {
    Agent& a = agents_[i];
    if (a.strategy == s) return;
    const int delta = s == Strategy::C ? 1 : -1;
    coop_ += delta;
    coop_by_group_[a.group == 1 ? 0 : 1] += delta;
    a.strategy = s;
  }

  void set_alpha(std::size_t i, double alpha) { agents_[i].alpha = alpha; }

 private:
  void recount() {
    coop_ = 0;
    coop_by_group_ = {0, 0};
    size_by_group_ = {0, 0};
    for (const auto& a : agents_) {
      const int g = a.group == 1 ? 0 : 1;
      ++size_by_group_[g];
      if (a.strategy == Strategy::C) {
        ++coop_;
        ++coop_by_group_[g];
      }
    }
  }

  std::vector<Agent> agents_;
  std::size_t coop_ = 0;
  std::array<std::size_t, 2> coop_by_group_{0, 0};
  std::array<std::size_t, 2> size_by_group_{0, 0};
};

/// The first floor(split N) agents form group 1 at alpha1, the rest group 2
/// at alpha2; strategies are independent Bernoulli(x0).
inline Population init_population(const AbmConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, {0}));
  const auto n1 = static_cast<std::size_t>(
      std::floor(cfg.split * static_cast<double>(cfg.N)));
  std::vector<Agent> agents(cfg.N);
  for (std::size_t i = 0; i < cfg.N; ++i) {
    agents[i].group = i < n1 ? 1 : 2;
    agents[i].alpha = i < n1 ? cfg.alpha1 : cfg.alpha2;
    agents[i].strategy = rng.bernoulli(cfg.x0) ? Strategy::C : Strategy::D;
  }
  return Population(std::move(agents));
}

/// (alpha2_bar - alpha1_bar) / (alpha1_bar + alpha2_bar), clamped to [0, 1].
/// Zero when both means vanish or a group is empty.
inline double delta_alpha(const Population& pop) {
  const double a1 = pop.mean_alpha(1);
  const double a2 = pop.mean_alpha(2);
  if (std::isnan(a1) || std::isnan(a2)) return 0.0;
  const double sum = a1 + a2;
  if (sum <= 0.0) return 0.0;
  return std::clamp((a2 - a1) / sum, 0.0, 1.0);
}

/// Total payoff against all N - 1 opponents under matrix m.
inline double total_payoff(const PayoffMatrix& m, Strategy s, std::size_t n_coop,
                           std::size_t n) noexcept {
  const double nc = static_cast<double>(n_coop);
  const double nd = static_cast<double>(n - n_coop);
  if (s == Strategy::C) return (nc - 1.0) * m.R + nd * m.S;
  return nc * m.T + (nd - 1.0) * m.P;
}

inline PayoffMatrix mix(const PayoffMatrix& a, const PayoffMatrix& b, double w) noexcept {
  return {(1.0 - w) * a.R + w * b.R, (1.0 - w) * a.S + w * b.S,
          (1.0 - w) * a.T + w * b.T, (1.0 - w) * a.P + w * b.P};
}

inline constexpr std::size_t kPerInteractionLimit = 2000;

/// Each agent's total payoff for the round, summed over the N - 1 games it
/// plays. per_round and expected are O(N) through the cooperator count.
inline void round_payoffs(const Population& pop, const DrunkGame& dg,
                          PerceptionMode mode, Rng& rng, std::vector<double>& out,
                          bool allow_large = false) {
  const std::size_t n = pop.size();
  const std::size_t nc = pop.cooperators();
  out.resize(n);
  switch (mode) {
    case PerceptionMode::per_round:
      for (std::size_t i = 0; i < n; ++i) {
        const Agent& a = pop[i];
        const PayoffMatrix& m = rng.bernoulli(a.alpha) ? dg.g2 : dg.g1;
        out[i] = total_payoff(m, a.strategy, nc, n);
      }
      return;
    case PerceptionMode::expected:
      for (std::size_t i = 0; i < n; ++i) {
        const Agent& a = pop[i];
        out[i] = total_payoff(mix(dg.g1, dg.g2, a.alpha), a.strategy, nc, n);
      }
      return;
    case PerceptionMode::per_interaction:
      if (n > kPerInteractionLimit && !allow_large) {
        throw Error(ErrorCode::cost_guard,
                    "per_interaction perception is O(N^2); N > 2000 needs the "
                    "override flag");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Agent& a = pop[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const PayoffMatrix& m = rng.bernoulli(a.alpha) ? dg.g2 : dg.g1;
          const bool other_c = pop[j].strategy == Strategy::C;
          if (a.strategy == Strategy::C) {
            sum += other_c ? m.R : m.S;
          } else {
            sum += other_c ? m.T : m.P;
          }
        }
        out[i] = sum;
      }
      return;
  }
}

inline std::vector<double> round_payoffs(const Population& pop, const DrunkGame& dg,
                                         PerceptionMode mode, Rng& rng,
                                         bool allow_large = false) {
  std::vector<double> out;
  round_payoffs(pop, dg, mode, rng, out, allow_large);
  return out;
}

/// max(0, beta (pi_j - pi_i) / phi).
inline double imitation_probability(double pi_i, double pi_j, double beta,
                                    double phi) noexcept {
  return std::max(0.0, beta * (pi_j - pi_i) / phi);
}

/// Largest minus smallest payoff entry over both matrices. With R = 1, P = 0
/// this is max(1, T1, T2) - min(0, S1, S2) for the preset games.
inline double payoff_range(const DrunkGame& dg) noexcept {
  const auto& a = dg.g1;
  const auto& b = dg.g2;
  const double hi = std::max({a.R, a.S, a.T, a.P, b.R, b.S, b.T, b.P});
  const double lo = std::min({a.R, a.S, a.T, a.P, b.R, b.S, b.T, b.P});
  return hi - lo;
}

/// Maximal possible difference of two round totals, (N - 1) * range.
inline double imitation_normalizer(const DrunkGame& dg, std::size_t n) noexcept {
  return static_cast<double>(n - 1) * payoff_range(dg);
}

struct StepWorkspace {
  std::vector<double> payoffs;
  std::vector<Strategy> next;
};

/// One synchronous round: payoffs from the time-t state, then every agent
/// imitates a uniformly chosen other agent with imitation_probability, and
/// every alpha moves by kappa alpha (1 - alpha) (signal - mu). All updates
/// read time-t values only.
inline void step_population(Population& pop, const DrunkGame& dg,
                            const AbmConfig& cfg, Rng& rng, StepWorkspace& ws) {
  const std::size_t n = pop.size();
  round_payoffs(pop, dg, cfg.perception_mode, rng, ws.payoffs,
                cfg.allow_large_per_interaction);
  const double phi = imitation_normalizer(dg, n);
  const std::size_t nc = pop.cooperators();
  const double x_bar = static_cast<double>(nc) / static_cast<double>(n);

  ws.next.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    Strategy s = pop[i].strategy;
    if (pop[j].strategy != s) {
      const double p = imitation_probability(ws.payoffs[i], ws.payoffs[j], cfg.beta, phi);
      if (p > 0.0 && rng.uniform() < p) s = pop[j].strategy;
    }
    ws.next[i] = s;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Agent& a = pop[i];
    double signal = x_bar;
    if (cfg.alpha_rule == AlphaRule::individual_experience) {
      // b_T: half of own plus opponent's cooperation, averaged over the
      // N - 1 opponents.
      const double own = a.strategy == Strategy::C ? 1.0 : 0.0;
      const double others = (static_cast<double>(nc) - own) / static_cast<double>(n - 1);
      signal = 0.5 * (own + others);
    }
    const double next_alpha =
        a.alpha + cfg.kappa * a.alpha * (1.0 - a.alpha) * (signal - cfg.mu);
    pop.set_alpha(i, std::clamp(next_alpha, 0.0, 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) pop.set_strategy(i, ws.next[i]);
}

inline void step_population(Population& pop, const DrunkGame& dg,
                            const AbmConfig& cfg, Rng& rng) {
  StepWorkspace ws;
  step_population(pop, dg, cfg, rng, ws);
}

struct AbmStats {
  std::size_t t = 0;
  double x_mean = 0.0;
  double alpha_mean = 0.0;
  double alpha_g1 = 0.0;
  double alpha_g2 = 0.0;
  double coop_g1 = 0.0;
  double coop_g2 = 0.0;
  double delta_alpha = 0.0;
  double dist_interior = std::numeric_limits<double>::quiet_NaN();
};

/// The game the ABM actually runs: payoffs from dg, q = x - mu from the
/// config.
inline DrunkGame abm_game(const DrunkGame& dg, const AbmConfig& cfg) {
  return make_drunk_game(dg.g1, dg.g2, cfg.kappa, QPoly::linear(cfg.mu));
}

/// First non-degenerate interior fixed point of the mean-field game.
inline std::optional<State> analytic_interior_point(const DrunkGame& dg) {
  for (const auto& fp : interior_fixed_points(dg)) {
    if (!fp.degenerate_root) return fp.state;
  }
  return std::nullopt;
}

inline AbmStats population_stats(const Population& pop, std::size_t t,
                                 const std::optional<State>& interior) {
  AbmStats s;
  s.t = t;
  s.x_mean = pop.cooperator_fraction();
  s.alpha_mean = pop.mean_alpha();
  s.alpha_g1 = pop.mean_alpha(1);
  s.alpha_g2 = pop.mean_alpha(2);
  auto frac = [&](int g) {
    const auto n = pop.group_size(g);
    return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : static_cast<double>(pop.cooperators_in(g)) / static_cast<double>(n);
  };
  s.coop_g1 = frac(1);
  s.coop_g2 = frac(2);
  s.delta_alpha = delta_alpha(pop);
  if (interior) {
    s.dist_interior = std::hypot(s.x_mean - interior->x, s.alpha_mean - interior->alpha);
  }
  return s;
}

struct AbmRun {
  std::vector<AbmStats> series;  // rounds 0..t_max
  std::optional<State> interior;
};

/// Initializes the population and runs t_max synchronous rounds.
/// Deterministic in cfg.seed.
inline AbmRun run_abm(const AbmConfig& cfg, const DrunkGame& dg) {
  cfg.validate();
  dg.validate();
  if (cfg.perception_mode == PerceptionMode::per_interaction &&
      cfg.N > kPerInteractionLimit && !cfg.allow_large_per_interaction) {
    throw Error(ErrorCode::cost_guard,
                "per_interaction perception with N > 2000 needs the override flag");
  }
  AbmRun run;
  run.interior = analytic_interior_point(abm_game(dg, cfg));
  Population pop = init_population(cfg);
  Rng rng(derive_seed(cfg.seed, {1}));
  StepWorkspace ws;
  run.series.reserve(cfg.t_max + 1);
  run.series.push_back(population_stats(pop, 0, run.interior));
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    step_population(pop, dg, cfg, rng, ws);
    run.series.push_back(population_stats(pop, t, run.interior));
  }
  return run;
}

/// Mean distance to the interior point over the final `fraction` of rounds.
inline double tail_mean_distance(const AbmRun& run, double fraction = 0.1) {
  const std::size_t n = run.series.size();
  const auto start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - fraction)));
  double s = 0.0;
  std::size_t k = 0;
  for (std::size_t i = std::min(start, n - 1); i < n; ++i) {
    s += run.series[i].dist_interior;
    ++k;
  }
  return s / static_cast<double>(k);
}

// Mean-field counterpart of a homogeneous run. With expected payoffs one
// round moves x by (beta / range) x (1 - x) (Pi_C - Pi_D) and alpha by
// kappa alpha (1 - alpha) (x - mu), so one round is beta / range units of
// mean-field time and the mean-field sensitivity is kappa * range / beta.

inline double nominal_round_duration(const DrunkGame& dg, const AbmConfig& cfg) {
  return cfg.beta / payoff_range(dg);
}

inline DrunkGame meanfield_counterpart(const DrunkGame& dg, const AbmConfig& cfg) {
  return make_drunk_game(dg.g1, dg.g2, cfg.kappa / nominal_round_duration(dg, cfg),
                         QPoly::linear(cfg.mu));
}

struct MeanFieldMatch {
  double dilation = 0.0;          // fitted mean-field time per round
  double nominal_dilation = 0.0;  // beta / range
  double rms = 0.0;               // Euclidean RMS over the compared rounds
};

/// Fits one time-dilation factor c (mean-field time = c * round) so that the
/// mean-field trajectory from the run's initial mean state best matches the
/// population means over `rounds` rounds, and reports the RMS distance.
inline MeanFieldMatch match_meanfield(std::span<const AbmStats> series,
                                      const DrunkGame& dg, const AbmConfig& cfg,
                                      std::size_t rounds, double mf_dt = 0.005) {
  if (series.empty()) throw Error(ErrorCode::invalid_parameter, "empty series");
  rounds = std::min(rounds, series.size());
  const DrunkGame mf = meanfield_counterpart(dg, cfg);
  const double c0 = nominal_round_duration(dg, cfg);
  const double c_lo = 0.5 * c0;
  const double c_hi = 1.5 * c0;

  const double horizon = c_hi * static_cast<double>(rounds);
  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / mf_dt)) + 1;
  std::vector<State> path;
  path.reserve(n_steps + 1);
  path.push_back(clamp_to_square({series[0].x_mean, series[0].alpha_mean}));
  for (std::size_t k = 0; k < n_steps; ++k) path.push_back(step_rk4(mf, path.back(), mf_dt));

  auto at = [&](double t) {
    const double pos = t / mf_dt;
    const auto k = std::min(static_cast<std::size_t>(pos), path.size() - 2);
    const double w = pos - static_cast<double>(k);
    return State{path[k].x + w * (path[k + 1].x - path[k].x),
                 path[k].alpha + w * (path[k + 1].alpha - path[k].alpha)};
  };
  auto rms_for = [&](double c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rounds; ++r) {
      const State p = at(c * static_cast<double>(r));
      const double dx = p.x - series[r].x_mean;
      const double da = p.alpha - series[r].alpha_mean;
      acc += dx * dx + da * da;
    }
    return std::sqrt(acc / static_cast<double>(rounds));
  };

  constexpr int kScan = 200;
  double best_c = c0;
  double best = rms_for(c0);
  for (int i = 0; i <= kScan; ++i) {
    const double c = c_lo + (c_hi - c_lo) * i / kScan;
    const double r = rms_for(c);
    if (r < best) {
      best = r;
      best_c = c;
    }
  }
  // Golden-section refinement inside the bracketing scan cell.
  const double step = (c_hi - c_lo) / kScan;
  double a = std::max(c_lo, best_c - step);
  double b = std::min(c_hi, best_c + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = b - g * (b - a), c2 = a + g * (b - a);
  double f1 = rms_for(c1), f2 = rms_for(c2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      b = c2; c2 = c1; f2 = f1; c1 = b - g * (b - a); f1 = rms_for(c1);
    } else {
      a = c1; c1 = c2; f1 = f2; c2 = a + g * (b - a); f2 = rms_for(c2);
    }
  }
  const double refined = 0.5 * (a + b);
  const double refined_rms = rms_for(refined);
  if (refined_rms < best) {
    best = refined_rms;
    best_c = refined;
  }
  return {best_c, c0, best};
}

}  // namespace drunk
