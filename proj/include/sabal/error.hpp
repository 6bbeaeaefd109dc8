#pragma once

#include <stdexcept>
#include <string>

namespace sabal {

enum class ErrorCode {
  DimensionMismatch,
  DegenerateDirection,
  BudgetExceedsPool,
  ProblemTooLarge,
  EmptySampleSet,
  InvalidDistribution,
  EmptyValidationSet,
  UntrainedModel,
  EmptyTrainingSet,
  LabelOutOfRange,
  PoolExhausted,
  ConfigInvalid,
  EmptyRecordList,
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;

// Input errors (malformed files, invalid configs) are distinguished from
// domain errors raised while computing; the CLI maps them to exit codes 2 and 3.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sabal
