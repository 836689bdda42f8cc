#pragma once

// A drunk game couples two payoff matrices through a perception state alpha
// whose population-level dynamics is kappa * alpha * (1 - alpha) * q(x).

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drunkgames/error.hpp"
#include "drunkgames/payoff.hpp"

namespace drunk {

/// Polynomial q(x) = sum_i c_i x^i. The zero polynomial freezes alpha.
class QPoly {
 public:
  QPoly() = default;

  explicit QPoly(std::vector<double> coefficients)
      : coeffs_(std::move(coefficients)) {
    for (double c : coeffs_) {
      if (!std::isfinite(c)) {
        throw Error(ErrorCode::invalid_parameter,
                    "q polynomial has a non-finite coefficient");
      }
    }
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  /// q(x) = x - mu.
  static QPoly linear(double mu) { return QPoly({-mu, 1.0}); }
  static QPoly zero() { return QPoly(); }

  bool is_zero() const noexcept { return coeffs_.empty(); }
  int degree() const noexcept {
    return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1;
  }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// mu when q is exactly x - mu.
  std::optional<double> linear_mu() const noexcept {
    if (coeffs_.size() == 2 && coeffs_[1] == 1.0) return -coeffs_[0];
    return std::nullopt;
  }

  double value(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * x + *it;
    }
    return acc;
  }

  /// (q(x), q'(x)) by a single Horner pass.
  std::pair<double, double> value_and_derivative(double x) const noexcept {
    double p = 0.0;
    double dp = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      dp = dp * x + p;
      p = p * x + *it;
    }
    return {p, dp};
  }

  friend bool operator==(const QPoly&, const QPoly&) = default;

 private:
  std::vector<double> coeffs_;
};

inline std::pair<double, double> q_eval_and_derivative(const QPoly& q,
                                                       double x) {
  return q.value_and_derivative(x);
}

struct DrunkGame {
  PayoffMatrix g1;  // perceived with probability 1 - alpha
  PayoffMatrix g2;  // perceived with probability alpha
  double kappa = 1.0;
  QPoly q = QPoly::linear(0.5);

  void validate() const {
    g1.validate();
    g2.validate();
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
      throw Error(ErrorCode::invalid_parameter, "kappa must be positive");
    }
  }

  friend bool operator==(const DrunkGame&, const DrunkGame&) = default;
};

inline DrunkGame make_drunk_game(PayoffMatrix g1, PayoffMatrix g2,
                                 double kappa = 1.0,
                                 QPoly q = QPoly::linear(0.5)) {
  DrunkGame dg{g1, g2, kappa, std::move(q)};
  dg.validate();
  return dg;
}

namespace presets {

inline constexpr double kDefaultKappa = 1.0;
inline constexpr double kDefaultMu = 0.5;

/// Sober prisoner's dilemma coupled with an intoxicated harmony game.
inline DrunkGame pub_dilemma(double kappa = kDefaultKappa,
                             double mu = kDefaultMu) {
  return make_drunk_game(PayoffMatrix::standard(-0.5, 1.5),
                         PayoffMatrix::standard(0.5, 0.5), kappa,
                         QPoly::linear(mu));
}

/// Harmony game with S = T = s coupled with PD(S = -1, T = 2).
inline DrunkGame drunk_prisoner(double s, double kappa = kDefaultKappa,
                                double mu = kDefaultMu) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter,
                "drunk_prisoner: s must lie in [0, 1]");
  }
  return make_drunk_game(PayoffMatrix::standard(s, s),
                         PayoffMatrix::standard(-1.0, 2.0), kappa,
                         QPoly::linear(mu));
}

/// Snowdrift with S = s1, T = 2 coupled with the stag hunt S = -0.5, T = 0.5.
inline DrunkGame battle(double s1, double kappa = kDefaultKappa,
                        double mu = kDefaultMu) {
  if (!(s1 >= 0.0 && s1 <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter,
                "battle: s1 must lie in [0, 1]");
  }
  return make_drunk_game(PayoffMatrix::standard(s1, 2.0),
                         PayoffMatrix::standard(-0.5, 0.5), kappa,
                         QPoly::linear(mu));
}

}  // namespace presets

/// Named preset lookup. Recognized params: "s" (drunk_prisoner), "s1"
/// (battle), and "kappa", "mu" for all three.
inline DrunkGame preset(std::string_view name,
                        const std::map<std::string, double>& params = {}) {
  auto take = [&](const char* key) -> std::optional<double> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
  };
  auto reject_unknown = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) {
        throw Error(ErrorCode::invalid_parameter,
                    "preset " + std::string(name) +
                        " does not take parameter '" + key + "'");
      }
    }
  };
  auto require = [&](const char* key) {
    auto v = take(key);
    if (!v) {
      throw Error(ErrorCode::invalid_parameter,
                  "preset " + std::string(name) + " requires parameter '" +
                      key + "'");
    }
    return *v;
  };
  const double kappa = take("kappa").value_or(presets::kDefaultKappa);
  const double mu = take("mu").value_or(presets::kDefaultMu);

  if (name == "pub_dilemma") {
    reject_unknown({"kappa", "mu"});
    return presets::pub_dilemma(kappa, mu);
  }
  if (name == "drunk_prisoner") {
    reject_unknown({"s", "kappa", "mu"});
    return presets::drunk_prisoner(require("s"), kappa, mu);
  }
  if (name == "battle") {
    reject_unknown({"s1", "kappa", "mu"});
    return presets::battle(require("s1"), kappa, mu);
  }
  throw Error(ErrorCode::unknown_preset,
              "unknown preset '" + std::string(name) +
                  "' (expected pub_dilemma, drunk_prisoner or battle)");
}

}  // namespace drunk
