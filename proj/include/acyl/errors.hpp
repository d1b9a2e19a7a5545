#pragma once

#include <stdexcept>
#include <string>

namespace acyl {

/// Root of every exception thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI to pick exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define ACYL_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                          \
  public:                                                              \
    explicit Name(const std::string& what) : Error(tag, what) {}       \
  };

ACYL_DEFINE_ERROR(InvalidInput, "invalid-input")
ACYL_DEFINE_ERROR(InsufficientSpectrum, "insufficient-spectrum")
ACYL_DEFINE_ERROR(CriticalRate, "critical-rate")
ACYL_DEFINE_ERROR(ModelInconsistency, "model-inconsistency")
ACYL_DEFINE_ERROR(InsufficientData, "insufficient-data")
ACYL_DEFINE_ERROR(IllPosedBoundary, "ill-posed-boundary")
ACYL_DEFINE_ERROR(HypothesisViolated, "hypothesis-violated")
ACYL_DEFINE_ERROR(PreconditionError, "precondition")
ACYL_DEFINE_ERROR(ConstantsInvalid, "constants-invalid")
ACYL_DEFINE_ERROR(NoThreshold, "no-T1")

#undef ACYL_DEFINE_ERROR

/// Dataset errors carry the offending 1-based line number (0 when the
/// problem is global, e.g. a wrong record count).
class DatasetValidation : public Error {
public:
  DatasetValidation(int line, const std::string& what)
      : Error("dataset-validation",
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace acyl
