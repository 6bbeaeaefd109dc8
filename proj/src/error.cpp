#include "sabal/error.hpp"

namespace sabal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
    case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::EmptyValidationSet: return "EmptyValidationSet";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EmptyRecordList: return "EmptyRecordList";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  return code == ErrorCode::ParseError || code == ErrorCode::ConfigInvalid;
}

}  // namespace sabal
