#pragma once

#include <stdexcept>
#include <string>

namespace minoseval {

// Every failure the pipeline can surface, across all modules. Messages carry
// the offending id / line / field so callers never need to re-derive context.
enum class ErrorCode {
  // rankings
  DuplicateId,
  MissingId,
  UnknownId,
  IncompleteScores,
  InvalidScore,
  // backends
  Transport,
  RateLimited,
  Timeout,
  ExhaustedRetries,
  MalformedBackendOutput,
  // parsing / scoring stages
  EmptyInput,
  EmptyExtraction,
  MalformedInstances,
  InvalidPermutation,
  // rank agreement
  IdSetMismatch,
  InvalidP,
  NotEnoughItems,
  // dataset
  MalformedJson,
  SchemaViolation,
  DuplicateSampleId,
  EmptyDataset,
  KTooLarge,
  // configuration
  Config,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace minoseval
