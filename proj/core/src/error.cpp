#include "lowsnr/error.hpp"

namespace lowsnr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NoDensity: return "NoDensity";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::ConditionTwelveFails: return "ConditionTwelveFails";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::Diverges: return "Diverges";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BlockTooLarge: return "BlockTooLarge";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::CrossCheckFailed: return "CrossCheckFailed";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lowsnr
