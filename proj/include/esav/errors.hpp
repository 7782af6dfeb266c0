#pragma once

#include <stdexcept>
#include <string>

namespace esav {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// (alpha + dt*g*l) vanished or went non-finite at some Fourier mode.
class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

// Non-finite energy or field: the discrete solution overflowed.
class EnergyOverflowError : public Error {
 public:
  using Error::Error;
};

// The exponent ln(R~) - E/S left the admissible window; xi would be
// numerically 0 or inf.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double exponent)
      : Error(what), exponent_(exponent) {}
  double exponent() const noexcept { return exponent_; }

 private:
  double exponent_;
};

// The scalar equation of the traditional E-SAV baseline did not converge.
class BaselineStepError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace esav

namespace esav {

// A simulation stopped at a given step; `what()` carries the cause.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, long step, double time, bool blow_up)
      : Error(what), step_(step), time_(time), blow_up_(blow_up) {}
  long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }
  bool blow_up() const noexcept { return blow_up_; }

 private:
  long step_;
  double time_;
  bool blow_up_;
};

}  // namespace esav
