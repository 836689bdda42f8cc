#pragma once

// Single two-player, two-strategy symmetric games: payoff matrices, the
// T-S classification, fear/greed and the one-dimensional replicator
// equilibria.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drunkgames/error.hpp"

namespace drunk {

/// Payoffs received by the row player.
///
///          C   D
///     C    R   S
///     D    T   P
struct PayoffMatrix {
  double R = 1.0;
  double S = 0.0;
  double T = 0.0;
  double P = 0.0;

  /// The usual normalization R = 1, P = 0.
  static constexpr PayoffMatrix standard(double s, double t) noexcept {
    return {1.0, s, t, 0.0};
  }

  bool is_finite() const noexcept {
    return std::isfinite(R) && std::isfinite(S) && std::isfinite(T) &&
           std::isfinite(P);
  }

  void validate() const {
    if (!is_finite()) {
      throw Error(ErrorCode::invalid_matrix,
                  "payoff matrix has a non-finite entry");
    }
  }

  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;
};

enum class Quadrant { PD, SD, SH, HG, Boundary };

constexpr std::string_view to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::PD: return "PD";
    case Quadrant::SD: return "SD";
    case Quadrant::SH: return "SH";
    case Quadrant::HG: return "HG";
    case Quadrant::Boundary: return "Boundary";
  }
  return "?";
}

struct GameClass {
  Quadrant quadrant = Quadrant::Boundary;
  // Only meaningful for Quadrant::Boundary.
  bool t_equals_r = false;
  bool s_equals_p = false;

  std::string label() const {
    if (quadrant != Quadrant::Boundary) return std::string(to_string(quadrant));
    std::string out = "Boundary(";
    if (t_equals_r) out += "T=R";
    if (t_equals_r && s_equals_p) out += ",";
    if (s_equals_p) out += "S=P";
    return out + ")";
  }

  friend bool operator==(const GameClass&, const GameClass&) = default;
};

inline GameClass classify_game(const PayoffMatrix& m) {
  m.validate();
  GameClass c;
  c.t_equals_r = (m.T == m.R);
  c.s_equals_p = (m.S == m.P);
  if (c.t_equals_r || c.s_equals_p) {
    c.quadrant = Quadrant::Boundary;
    return c;
  }
  const bool greedy = m.T > m.R;
  const bool sucker_gain = m.S > m.P;
  if (greedy) {
    c.quadrant = sucker_gain ? Quadrant::SD : Quadrant::PD;
  } else {
    c.quadrant = sucker_gain ? Quadrant::HG : Quadrant::SH;
  }
  return c;
}

struct FearGreed {
  double fear = 0.0;   // P - S
  double greed = 0.0;  // T - R

  /// Incentive to defect at cooperator fraction x, without domain checks.
  constexpr double incentive(double x) const noexcept {
    return (1.0 - x) * fear + x * greed;
  }
};

inline FearGreed fear_greed(const PayoffMatrix& m) {
  m.validate();
  return {m.P - m.S, m.T - m.R};
}

/// h(x) = (1 - x) F + x G.
inline double incentive_to_defect(const PayoffMatrix& m, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::domain,
                "cooperator fraction must lie in [0, 1], got " +
                    std::to_string(x));
  }
  return fear_greed(m).incentive(x);
}

/// Interior root of h, present only when fear and greed have strictly
/// opposite signs.
constexpr std::optional<double> interior_root(FearGreed fg) noexcept {
  if ((fg.fear > 0.0 && fg.greed < 0.0) || (fg.fear < 0.0 && fg.greed > 0.0)) {
    return fg.fear / (fg.fear - fg.greed);
  }
  return std::nullopt;
}

enum class Stability { stable, unstable };

constexpr std::string_view to_string(Stability s) noexcept {
  return s == Stability::stable ? "stable" : "unstable";
}

struct SingleEquilibrium {
  double x = 0.0;
  Stability stability = Stability::unstable;
};

/// Stability of the corner x = 0 under xdot = -x (1 - x) h(x).
///
/// Near 0 the sign of xdot is -sign(h(0+)); when F = 0 the leading term of
/// h is x G.
constexpr Stability corner_stability_at_zero(FearGreed fg) noexcept {
  const double lead = fg.fear != 0.0 ? fg.fear : fg.greed;
  return lead > 0.0 ? Stability::stable : Stability::unstable;
}

constexpr Stability corner_stability_at_one(FearGreed fg) noexcept {
  const double lead = fg.greed != 0.0 ? fg.greed : fg.fear;
  return lead < 0.0 ? Stability::stable : Stability::unstable;
}

/// Equilibria of xdot = -x (1 - x) h(x), ordered by x.
inline std::vector<SingleEquilibrium> single_game_fixed_points(
    const PayoffMatrix& m) {
  const FearGreed fg = fear_greed(m);
  if (fg.fear == 0.0 && fg.greed == 0.0) {
    throw Error(ErrorCode::degenerate_game,
                "F = G = 0: every x is an equilibrium");
  }
  std::vector<SingleEquilibrium> out;
  out.push_back({0.0, corner_stability_at_zero(fg)});
  if (auto root = interior_root(fg)) {
    // F < 0 < G is the snowdrift-type attractor, G < 0 < F the stag-hunt
    // separatrix.
    out.push_back({*root, fg.fear < 0.0 ? Stability::stable
                                        : Stability::unstable});
  }
  out.push_back({1.0, corner_stability_at_one(fg)});
  return out;
}

}  // namespace drunk
