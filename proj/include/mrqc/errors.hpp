#pragma once

#include <stdexcept>
#include <string>

namespace mrqc {

/// Operand shapes or subsystem indices do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain where a closed form exists.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Device parameters or a measured calibration quantity are non-physical.
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A least-squares or EM fit failed to produce a usable estimate.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A logical circuit cannot be mapped onto the transmon + phonon-mode machine.
struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mrqc
