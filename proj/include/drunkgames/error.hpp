#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drunk {

enum class ErrorCode {
  invalid_matrix,
  domain,
  degenerate_game,
  unknown_preset,
  invalid_parameter,
  undefined_ratio,
  division_degeneracy,
  cost_guard,
  config,
  io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_matrix: return "invalid-matrix";
    case ErrorCode::domain: return "domain";
    case ErrorCode::degenerate_game: return "degenerate-game";
    case ErrorCode::unknown_preset: return "unknown-preset";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::division_degeneracy: return "division-degeneracy";
    case ErrorCode::cost_guard: return "cost-guard";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drunk
