#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowsnr {

enum class ErrorCode {
  ParamOutOfRange,
  NotNormalized,
  NoDensity,
  DimensionTooLarge,
  QuadratureFailure,
  ConditionTwelveFails,
  NonConvergent,
  Diverges,
  DomainError,
  EmbeddingFailure,
  TooShort,
  BlockTooLarge,
  IllConditioned,
  CrossCheckFailed,
  UsageError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported as an Error carrying a code that
/// callers (notably the CLI) map onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for outcomes that are numerical verdicts rather than bad input.
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::Diverges:
      case ErrorCode::ConditionTwelveFails:
      case ErrorCode::NonConvergent:
      case ErrorCode::QuadratureFailure:
      case ErrorCode::EmbeddingFailure:
      case ErrorCode::IllConditioned:
      case ErrorCode::CrossCheckFailed:
      case ErrorCode::NoDensity:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace lowsnr
