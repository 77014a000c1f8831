#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdag {

enum class ErrorKind {
  InvalidGraph,
  InvalidTask,
  InvalidTaskSet,
  ComponentWithoutTimerSource,
  MultipleSources,
  CycleAfterSplit,
  NotASink,
  UnknownVertex,
  Overflow,
  InvalidExecAssignment,
  SamplerMissingVertex,
  SampleExceedsWcet,
  InvalidConfig,
  Parse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::InvalidTask: return "InvalidTask";
    case ErrorKind::InvalidTaskSet: return "InvalidTaskSet";
    case ErrorKind::ComponentWithoutTimerSource: return "ComponentWithoutTimerSource";
    case ErrorKind::MultipleSources: return "MultipleSources";
    case ErrorKind::CycleAfterSplit: return "CycleAfterSplit";
    case ErrorKind::NotASink: return "NotASink";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::InvalidExecAssignment: return "InvalidExecAssignment";
    case ErrorKind::SamplerMissingVertex: return "SamplerMissingVertex";
    case ErrorKind::SampleExceedsWcet: return "SampleExceedsWcet";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Input or model validation failure. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// File system failure. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mdag
