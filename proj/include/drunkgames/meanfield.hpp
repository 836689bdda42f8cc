#pragma once

// Population-level dynamics of a drunk game on the unit square:
//
//   xdot     = -x (1 - x) [(1 - alpha) h1(x) + alpha h2(x)]
//   alphadot = kappa alpha (1 - alpha) q(x)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drunkgames/drunk_game.hpp"
#include "drunkgames/error.hpp"

namespace drunk {

struct State {
  double x = 0.0;      // fraction of cooperators
  double alpha = 0.0;  // probability of perceiving g2

  bool in_unit_square() const noexcept {
    return x >= 0.0 && x <= 1.0 && alpha >= 0.0 && alpha <= 1.0;
  }

  friend bool operator==(const State&, const State&) = default;
};

inline double linf_distance(State a, State b) noexcept {
  return std::max(std::abs(a.x - b.x), std::abs(a.alpha - b.alpha));
}

inline State clamp_to_square(State s) noexcept {
  return {std::clamp(s.x, 0.0, 1.0), std::clamp(s.alpha, 0.0, 1.0)};
}

struct ExpectedPayoffs {
  double cooperate = 0.0;
  double defect = 0.0;
};

/// Alpha-weighted expected payoffs of a cooperator and a defector.
///
/// Each perception term pairs entries of the same matrix (R1 with S1, T1
/// with P1). The printed convex combination mixes indices across the two
/// terms; both agree under R = 1, P = 0, and only this pairing is
/// consistent with the incentive form used by vector_field for general
/// payoffs.
inline ExpectedPayoffs expected_payoffs(const DrunkGame& dg, State s) noexcept {
  const auto& a = dg.g1;
  const auto& b = dg.g2;
  const double x = s.x;
  const double w = s.alpha;
  return {
      (1.0 - w) * (x * a.R + (1.0 - x) * a.S) + w * (x * b.R + (1.0 - x) * b.S),
      (1.0 - w) * (x * a.T + (1.0 - x) * a.P) + w * (x * b.T + (1.0 - x) * b.P),
  };
}

struct Velocity {
  double dx = 0.0;
  double dalpha = 0.0;
};

/// The vector field. Evaluates the polynomial expression as is, so it is
/// also defined just outside the unit square (RK4 stages may land there).
inline Velocity vector_field(const DrunkGame& dg, State s) noexcept {
  const FearGreed f1{dg.g1.P - dg.g1.S, dg.g1.T - dg.g1.R};
  const FearGreed f2{dg.g2.P - dg.g2.S, dg.g2.T - dg.g2.R};
  const double x = s.x;
  const double a = s.alpha;
  const double incentive =
      (1.0 - a) * f1.incentive(x) + a * f2.incentive(x);
  return {-x * (1.0 - x) * incentive,
          dg.kappa * a * (1.0 - a) * dg.q.value(x)};
}

/// One classical RK4 step followed by clamping to the unit square.
inline State step_rk4(const DrunkGame& dg, State s, double dt) noexcept {
  auto shifted = [](State base, Velocity k, double h) {
    return State{base.x + h * k.dx, base.alpha + h * k.dalpha};
  };
  const Velocity k1 = vector_field(dg, s);
  const Velocity k2 = vector_field(dg, shifted(s, k1, 0.5 * dt));
  const Velocity k3 = vector_field(dg, shifted(s, k2, 0.5 * dt));
  const Velocity k4 = vector_field(dg, shifted(s, k3, dt));
  const double w = dt / 6.0;
  return clamp_to_square(
      {s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
       s.alpha + w * (k1.dalpha + 2.0 * k2.dalpha + 2.0 * k3.dalpha +
                      k4.dalpha)});
}

enum class Termination { converged, max_time, cycle_suspected };

constexpr std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_time: return "max_time";
    case Termination::cycle_suspected: return "cycle_suspected";
  }
  return "?";
}

struct TrajectorySample {
  double t = 0.0;
  State state;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<TrajectorySample> samples;
  Termination termination = Termination::max_time;
  std::optional<State> target;         // set when converged
  std::optional<std::size_t> target_index;

  State final_state() const { return samples.back().state; }
  double final_time() const { return samples.back().t; }
};

struct IntegrateOptions {
  double dt = 0.01;
  double t_max = 1e4;
  double eps = 1e-3;
  int sample_every = 10;
  /// Keep every recorded sample in the result. When false only the first
  /// and last samples are returned (cycle detection still sees them all).
  bool keep_samples = true;
};

namespace detail {

/// Spatial hash over recorded samples for the revisit heuristic: a sampled
/// state within `radius` (L-inf) of an earlier sample recorded at least
/// `min_gap` time units before.
class RevisitDetector {
 public:
  RevisitDetector(double radius, double min_gap)
      : radius_(radius), min_gap_(min_gap) {}

  bool check_and_insert(const TrajectorySample& s) {
    const auto cx = cell(s.state.x);
    const auto cy = cell(s.state.alpha);
    bool hit = false;
    for (std::int64_t i = cx - 1; i <= cx + 1 && !hit; ++i) {
      for (std::int64_t j = cy - 1; j <= cy + 1 && !hit; ++j) {
        auto it = cells_.find(key(i, j));
        if (it == cells_.end()) continue;
        // Entries are in time order: stop at the first one that is too
        // recent.
        for (const auto& prev : it->second) {
          if (s.t - prev.t < min_gap_) break;
          if (linf_distance(prev.state, s.state) <= radius_) {
            hit = true;
            break;
          }
        }
      }
    }
    cells_[key(cx, cy)].push_back(s);
    return hit;
  }

 private:
  std::int64_t cell(double v) const noexcept {
    return static_cast<std::int64_t>(std::floor(v / radius_));
  }
  static std::uint64_t key(std::int64_t i, std::int64_t j) noexcept {
    return (static_cast<std::uint64_t>(i) << 32) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
  }

  double radius_;
  double min_gap_;
  std::unordered_map<std::uint64_t, std::vector<TrajectorySample>> cells_;
};

inline std::optional<std::size_t> near_target(State s,
                                              std::span<const State> targets,
                                              double eps) noexcept {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (linf_distance(s, targets[i]) < eps) return i;
  }
  return std::nullopt;
}

}  // namespace detail

/// Integrates with step_rk4 until the state is within `eps` (L-inf) of a
/// target, until t_max, or until a sampled state revisits an earlier sample
/// (within eps / 10, at least t_max / 100 time units apart).
inline Trajectory integrate(const DrunkGame& dg, State s0,
                            std::span<const State> targets,
                            const IntegrateOptions& opt = {}) {
  if (!(opt.dt > 0.0) || !(opt.t_max > 0.0) || !(opt.eps > 0.0) ||
      opt.sample_every < 1) {
    throw Error(ErrorCode::invalid_parameter,
                "integrate: dt, t_max, eps and sample_every must be positive");
  }
  if (!s0.in_unit_square()) {
    throw Error(ErrorCode::domain, "initial state outside the unit square");
  }
  for (const State& t : targets) {
    if (!t.in_unit_square()) {
      throw Error(ErrorCode::domain, "target outside the unit square");
    }
  }

  Trajectory traj;
  traj.dt = opt.dt;
  detail::RevisitDetector revisits(opt.eps / 10.0, opt.t_max / 100.0);

  auto record = [&](TrajectorySample s) {
    if (opt.keep_samples || traj.samples.empty()) {
      traj.samples.push_back(s);
    } else {
      traj.samples.resize(2);
      traj.samples[1] = s;
    }
  };
  auto finish = [&](TrajectorySample last, Termination why) {
    if (traj.samples.back().t < last.t) record(last);
    traj.termination = why;
    return traj;
  };

  record({0.0, s0});
  if (auto hit = detail::near_target(s0, targets, opt.eps)) {
    traj.target = targets[*hit];
    traj.target_index = *hit;
    return finish({0.0, s0}, Termination::converged);
  }
  revisits.check_and_insert({0.0, s0});

  const auto n_steps = static_cast<std::int64_t>(
      std::ceil(opt.t_max / opt.dt - 1e-9));
  State s = s0;
  for (std::int64_t step = 1; step <= n_steps; ++step) {
    s = step_rk4(dg, s, opt.dt);
    const TrajectorySample now{static_cast<double>(step) * opt.dt, s};
    if (auto hit = detail::near_target(s, targets, opt.eps)) {
      traj.target = targets[*hit];
      traj.target_index = *hit;
      return finish(now, Termination::converged);
    }
    if (step % opt.sample_every == 0) {
      record(now);
      if (revisits.check_and_insert(now)) {
        return finish(now, Termination::cycle_suspected);
      }
    }
    if (step == n_steps) return finish(now, Termination::max_time);
  }
  return finish(traj.samples.back(), Termination::max_time);
}

inline Trajectory integrate(const DrunkGame& dg, State s0,
                            std::initializer_list<State> targets,
                            const IntegrateOptions& opt = {}) {
  return integrate(dg, s0, std::span<const State>(targets.begin(), targets.size()),
                   opt);
}

struct FieldSample {
  State state;
  Velocity velocity;
};

/// Vector field on the n x n lattice over [0, 1]^2; x is the slow index.
inline std::vector<FieldSample> field_grid(const DrunkGame& dg, int n) {
  if (n < 2) {
    throw Error(ErrorCode::invalid_parameter, "field_grid needs n >= 2");
  }
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double step = 1.0 / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = i == n - 1 ? 1.0 : i * step;
    for (int j = 0; j < n; ++j) {
      const double a = j == n - 1 ? 1.0 : j * step;
      const State s{x, a};
      out.push_back({s, vector_field(dg, s)});
    }
  }
  return out;
}

}  // namespace drunk
