#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmmclass {

enum class ErrorCode {
  InvalidModel,
  InvalidConfig,
  InvalidObservation,
  TypeMismatch,
  EmptySequence,
  LengthMismatch,
  ImpossibleSequence,
  InstanceTooLarge,
  EmptyTrainingSet,
  SequenceTooShort,
  StateStarved,
  DegenerateVariance,
  WindowTooLong,
  Unclassifiable,
  UnknownLabel,
  EmptyTestSet,
  DuplicateLabel,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// what() is "<CodeName>: <detail>" so callers that only see the message can
// still match on the code name.
class HmmError : public std::runtime_error {
 public:
  HmmError(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace hmmclass
