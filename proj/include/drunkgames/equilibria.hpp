#pragma once

// Fixed points of a drunk game and their linear stability.
//
// Boundary points come from the corners, from interior equilibria of each
// single game on the edges alpha = 0 and alpha = 1, and from whole edges
// x = 0 / x = 1 when q vanishes there. Interior points sit on roots of q
// where the two incentives have opposite signs.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drunkgames/drunk_game.hpp"
#include "drunkgames/error.hpp"
#include "drunkgames/meanfield.hpp"
#include "drunkgames/payoff.hpp"

namespace drunk {

/// Quantities with magnitude below this are treated as zero.
inline constexpr double kZeroTol = 1e-9;

enum class PointKind { corner, edge_alpha0, edge_alpha1, edge_x0, edge_x1, interior };

constexpr std::string_view to_string(PointKind k) noexcept {
  switch (k) {
    case PointKind::corner: return "corner";
    case PointKind::edge_alpha0: return "edge_alpha0";
    case PointKind::edge_alpha1: return "edge_alpha1";
    case PointKind::edge_x0: return "edge_x0";
    case PointKind::edge_x1: return "edge_x1";
    case PointKind::interior: return "interior";
  }
  return "?";
}

enum class StabilityClass {
  stable_node,
  unstable_node,
  saddle,
  stable_spiral,
  unstable_spiral,
  center,
  degenerate,
};

constexpr std::string_view to_string(StabilityClass c) noexcept {
  switch (c) {
    case StabilityClass::stable_node: return "stable_node";
    case StabilityClass::unstable_node: return "unstable_node";
    case StabilityClass::saddle: return "saddle";
    case StabilityClass::stable_spiral: return "stable_spiral";
    case StabilityClass::unstable_spiral: return "unstable_spiral";
    case StabilityClass::center: return "center";
    case StabilityClass::degenerate: return "degenerate";
  }
  return "?";
}

constexpr bool is_stable(StabilityClass c) noexcept {
  return c == StabilityClass::stable_node || c == StabilityClass::stable_spiral;
}

/// Eigenvalues written as u +- i sqrt(v): u is half the trace and
/// v = det - u^2.
struct EigenSummary {
  double u = std::numeric_limits<double>::quiet_NaN();
  double v = std::numeric_limits<double>::quiet_NaN();
  std::complex<double> lambda1{std::numeric_limits<double>::quiet_NaN(), 0.0};
  std::complex<double> lambda2{std::numeric_limits<double>::quiet_NaN(), 0.0};
};

struct FixedPoint {
  State state;
  PointKind kind = PointKind::corner;
  StabilityClass stability = StabilityClass::degenerate;
  EigenSummary eigen;
  /// Stability predicted from the single-game rule (boundary points that
  /// are equilibria of g1 at alpha = 0 or of g2 at alpha = 1).
  std::optional<bool> rule_stable;
  /// Root of q where one incentive vanishes; existence fails the strict
  /// opposite-sign test.
  bool degenerate_root = false;
  /// Representative of a whole edge of fixed points.
  bool line = false;
  std::string note;
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Finite-difference Jacobian [[dxdot/dx, dxdot/dalpha], [dadot/dx,
/// dadot/dalpha]]. Central differences where s +- h stays inside the unit
/// square, otherwise the one-sided three-point stencil pointing inwards.
inline Matrix2 numeric_jacobian(const DrunkGame& dg, State s, double h = 1e-6) {
  if (!(h > 0.0) || h > 0.25) {
    throw Error(ErrorCode::invalid_parameter, "jacobian step must be in (0, 0.25]");
  }
  auto f = [&](State p) { return vector_field(dg, p); };
  auto column = [&](double State::*coord) -> std::pair<double, double> {
    const double c = s.*coord;
    State a = s, b = s, m = s;
    if (c - h >= 0.0 && c + h <= 1.0) {
      a.*coord = c + h;
      b.*coord = c - h;
      const Velocity fa = f(a), fb = f(b);
      return {(fa.dx - fb.dx) / (2 * h), (fa.dalpha - fb.dalpha) / (2 * h)};
    }
    const double dir = (c - h < 0.0) ? 1.0 : -1.0;
    a.*coord = c + dir * h;
    m.*coord = c + dir * 2 * h;
    const Velocity f0 = f(s), f1 = f(a), f2 = f(m);
    const double scale = dir / (2 * h);
    return {scale * (-3 * f0.dx + 4 * f1.dx - f2.dx),
            scale * (-3 * f0.dalpha + 4 * f1.dalpha - f2.dalpha)};
  };
  const auto [dxx, dax] = column(&State::x);
  const auto [dxa, daa] = column(&State::alpha);
  return {{{dxx, dxa}, {dax, daa}}};
}

/// Summary of a 2x2 matrix's spectrum, lambda1 has the larger real part
/// (or the positive imaginary part for a complex pair).
inline EigenSummary eigen_summary(const Matrix2& j) {
  EigenSummary e;
  const double tr = j[0][0] + j[1][1];
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  e.u = tr / 2.0;
  e.v = det - e.u * e.u;
  if (e.v > 0.0) {
    const double w = std::sqrt(e.v);
    e.lambda1 = {e.u, w};
    e.lambda2 = {e.u, -w};
  } else {
    const double w = std::sqrt(-e.v);
    e.lambda1 = {e.u + w, 0.0};
    e.lambda2 = {e.u - w, 0.0};
  }
  return e;
}

/// Classification from the two eigenvalues alone.
inline StabilityClass classify_eigen(const EigenSummary& e, double tol = kZeroTol) {
  if (std::isnan(e.u) || std::isnan(e.v)) return StabilityClass::degenerate;
  const double im = std::abs(e.lambda1.imag());
  if (e.v > tol && im > 0.0) {
    if (std::abs(e.u) < tol) return StabilityClass::center;
    return e.u < 0.0 ? StabilityClass::stable_spiral : StabilityClass::unstable_spiral;
  }
  const double l1 = e.lambda1.real();
  const double l2 = e.lambda2.real();
  if (std::abs(l1) < tol || std::abs(l2) < tol) return StabilityClass::degenerate;
  if (l1 < 0.0 && l2 < 0.0) return StabilityClass::stable_node;
  if (l1 > 0.0 && l2 > 0.0) return StabilityClass::unstable_node;
  return StabilityClass::saddle;
}

/// Eigenvalue data at an interior fixed point from the closed forms
///
///   u = x (1 - x) alpha / 2 * (F2 G1 - F1 G2) / h1(x)
///   v = kappa x (1 - x) alpha h2(x) q'(x) - u^2
inline EigenSummary interior_eigen(const DrunkGame& dg, double x_tilde,
                                   double alpha_tilde) {
  const FearGreed f1 = fear_greed(dg.g1);
  const FearGreed f2 = fear_greed(dg.g2);
  const double h1 = f1.incentive(x_tilde);
  const double h2 = f2.incentive(x_tilde);
  if (std::abs(h1) < kZeroTol) {
    throw Error(ErrorCode::division_degeneracy,
                "interior_eigen: h1 vanishes at the fixed point");
  }
  const double xx = x_tilde * (1.0 - x_tilde);
  EigenSummary e;
  e.u = xx * alpha_tilde / 2.0 *
        (f2.fear * f1.greed - f1.fear * f2.greed) / h1;
  const double dq = dg.q.value_and_derivative(x_tilde).second;
  e.v = dg.kappa * xx * alpha_tilde * h2 * dq - e.u * e.u;
  if (e.v > 0.0) {
    e.lambda1 = {e.u, std::sqrt(e.v)};
    e.lambda2 = {e.u, -std::sqrt(e.v)};
  } else {
    e.lambda1 = {e.u + std::sqrt(-e.v), 0.0};
    e.lambda2 = {e.u - std::sqrt(-e.v), 0.0};
  }
  return e;
}

/// Roots of q in the open interval (0, 1). Linear q is solved in closed
/// form; otherwise a sign-change scan on a 1024-point grid followed by
/// bisection to 1e-12. Even-multiplicity roots without a sign change are
/// not found.
inline std::vector<double> q_roots(const QPoly& q) {
  std::vector<double> roots;
  if (q.is_zero() || q.degree() == 0) return roots;
  const auto c = q.coefficients();
  if (q.degree() == 1) {
    const double r = -c[0] / c[1];
    if (r > 0.0 && r < 1.0) roots.push_back(r);
    return roots;
  }
  constexpr int kGrid = 1024;
  double prev_x = 0.0;
  double prev_q = q.value(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double x = static_cast<double>(i) / kGrid;
    const double qx = q.value(x);
    if (qx == 0.0 && x < 1.0) {
      roots.push_back(x);
    } else if (prev_q != 0.0 && ((prev_q < 0.0) != (qx < 0.0)) && qx != 0.0) {
      double lo = prev_x, hi = x, qlo = prev_q;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double qm = q.value(mid);
        if (qm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((qm < 0.0) == (qlo < 0.0)) {
          lo = mid;
          qlo = qm;
        } else {
          hi = mid;
        }
      }
      const double r = 0.5 * (lo + hi);
      if (r > 0.0 && r < 1.0) roots.push_back(r);
    }
    prev_x = x;
    prev_q = qx;
  }
  return roots;
}

namespace detail {

inline FixedPoint classify_numerically(const DrunkGame& dg, FixedPoint fp) {
  fp.eigen = eigen_summary(numeric_jacobian(dg, fp.state));
  fp.stability = classify_eigen(fp.eigen);
  return fp;
}

inline bool single_stable_at(const PayoffMatrix& m, double x) {
  for (const auto& eq : single_game_fixed_points(m)) {
    if (std::abs(eq.x - x) < kZeroTol) return eq.stability == Stability::stable;
  }
  return false;
}

/// Stability rule for original equilibria: (x, 0) needs x stable in g1 and
/// q(x) < 0, (x, 1) needs x stable in g2 and q(x) > 0.
inline std::optional<bool> edge_rule(const DrunkGame& dg, State s) {
  const bool on_g1 = s.alpha == 0.0;
  const PayoffMatrix& m = on_g1 ? dg.g1 : dg.g2;
  const FearGreed fg = fear_greed(m);
  if (fg.fear == 0.0 && fg.greed == 0.0) return std::nullopt;
  const double q = dg.q.value(s.x);
  const bool stable_single = single_stable_at(m, s.x);
  return stable_single && (on_g1 ? q < 0.0 : q > 0.0);
}

}  // namespace detail

inline std::vector<FixedPoint> boundary_fixed_points(const DrunkGame& dg) {
  dg.validate();
  std::vector<FixedPoint> out;
  auto add_single_game_point = [&](State s, PointKind kind) {
    FixedPoint fp;
    fp.state = s;
    fp.kind = kind;
    fp.rule_stable = detail::edge_rule(dg, s);
    if (!fp.rule_stable) fp.note = "degenerate single game";
    out.push_back(detail::classify_numerically(dg, fp));
  };

  for (double a : {0.0, 1.0}) {
    for (double x : {0.0, 1.0}) add_single_game_point({x, a}, PointKind::corner);
  }
  if (auto r = interior_root(fear_greed(dg.g1))) {
    add_single_game_point({*r, 0.0}, PointKind::edge_alpha0);
  }
  if (auto r = interior_root(fear_greed(dg.g2))) {
    add_single_game_point({*r, 1.0}, PointKind::edge_alpha1);
  }
  for (double x : {0.0, 1.0}) {
    if (std::abs(dg.q.value(x)) < kZeroTol) {
      FixedPoint fp;
      fp.state = {x, 0.5};
      fp.kind = x == 0.0 ? PointKind::edge_x0 : PointKind::edge_x1;
      fp.line = true;
      fp.note = "q vanishes on this edge: every 0 < alpha < 1 is fixed";
      fp = detail::classify_numerically(dg, fp);
      out.push_back(fp);
    }
  }
  return out;
}

inline std::vector<FixedPoint> interior_fixed_points(const DrunkGame& dg) {
  dg.validate();
  const FearGreed f1 = fear_greed(dg.g1);
  const FearGreed f2 = fear_greed(dg.g2);
  std::vector<FixedPoint> out;
  for (double x : q_roots(dg.q)) {
    const double h1 = f1.incentive(x);
    const double h2 = f2.incentive(x);
    FixedPoint fp;
    fp.kind = PointKind::interior;
    if (std::abs(h1) < kZeroTol || std::abs(h2) < kZeroTol) {
      fp.degenerate_root = true;
      fp.stability = StabilityClass::degenerate;
      const double denom = h1 - h2;
      fp.state = {x, std::abs(denom) < kZeroTol
                         ? std::numeric_limits<double>::quiet_NaN()
                         : h1 / denom};
      fp.note = "q root where an incentive vanishes (h1=" + std::to_string(h1) +
                ", h2=" + std::to_string(h2) + ")";
      out.push_back(fp);
      continue;
    }
    if (h1 * h2 > 0.0) continue;
    fp.state = {x, h1 / (h1 - h2)};
    fp.eigen = interior_eigen(dg, fp.state.x, fp.state.alpha);
    fp.stability = classify_eigen(fp.eigen);
    out.push_back(fp);
  }
  return out;
}

/// All fixed points: boundary first, then interior.
inline std::vector<FixedPoint> fixed_points(const DrunkGame& dg) {
  auto out = boundary_fixed_points(dg);
  for (auto& fp : interior_fixed_points(dg)) out.push_back(std::move(fp));
  return out;
}

/// Stable fixed points that are not degenerate markers.
inline std::vector<State> stable_states(const DrunkGame& dg) {
  std::vector<State> out;
  for (const auto& fp : fixed_points(dg)) {
    if (!fp.degenerate_root && !fp.line && is_stable(fp.stability)) {
      out.push_back(fp.state);
    }
  }
  return out;
}

/// Interior attractivity condition F1 / G1 > F2 / G2.
inline bool attractive_interior_condition(const DrunkGame& dg) {
  const FearGreed f1 = fear_greed(dg.g1);
  const FearGreed f2 = fear_greed(dg.g2);
  if (f1.greed == 0.0 || f2.greed == 0.0) {
    throw Error(ErrorCode::undefined_ratio,
                "fear/greed ratio undefined for zero greed");
  }
  return f1.fear / f1.greed > f2.fear / f2.greed;
}

}  // namespace drunk
