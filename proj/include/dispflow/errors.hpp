#pragma once

#include <stdexcept>
#include <string>

namespace dispflow {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define DISPFLOW_ERROR(Name)                                      \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what) : Error(what) {}       \
    const char* kind() const noexcept override { return #Name; }  \
  }

// A point left the tubular neighbourhood; usually blow-up or a too-large step.
DISPFLOW_ERROR(OutOfTubularNeighborhood);
DISPFLOW_ERROR(PointOffManifold);
DISPFLOW_ERROR(TangencyViolation);
DISPFLOW_ERROR(NoContraction);
DISPFLOW_ERROR(StepSizeUnstable);
DISPFLOW_ERROR(WrongManifold);
DISPFLOW_ERROR(UnsupportedCoefficients);
DISPFLOW_ERROR(BaseMismatch);
DISPFLOW_ERROR(ConfigError);

#undef DISPFLOW_ERROR

}  // namespace dispflow
