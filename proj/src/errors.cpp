#include "minoseval/errors.hpp"

namespace minoseval {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingId: return "MissingId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::IncompleteScores: return "IncompleteScores";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::MalformedBackendOutput: return "MalformedBackendOutput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyExtraction: return "EmptyExtraction";
    case ErrorCode::MalformedInstances: return "MalformedInstances";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::IdSetMismatch: return "IdSetMismatch";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::NotEnoughItems: return "NotEnoughItems";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace minoseval
