#include "hmmclass/error.hpp"

namespace hmmclass {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidObservation: return "InvalidObservation";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ImpossibleSequence: return "ImpossibleSequence";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::StateStarved: return "StateStarved";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::Unclassifiable: return "Unclassifiable";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

HmmError::HmmError(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace hmmclass
