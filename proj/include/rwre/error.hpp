#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

// Exception hierarchy. The CLI maps each leaf type to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed law or config (rows not summing to one, bad K, ...).
class InvalidLaw : public Error {
 public:
  using Error::Error;
};

/// Law violates the uniform ellipticity bound and relax_ellipticity is off.
class EllipticityViolation : public Error {
 public:
  using Error::Error;
};

/// The law has zero diffusivity (sigmaBar2 == 0); limit constants undefined.
class DegenerateLaw : public Error {
 public:
  DegenerateLaw(const std::string& what, double c0, double c1, double u0)
      : Error(what), c0(c0), c1(c1), u0(u0) {}
  double c0;
  double c1;
  double u0;
};

/// An iterative computation did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual(residual) {}
  double residual;
};

/// Level-sweep lost more probability mass than truncation can explain.
class MassLeak : public Error {
 public:
  using Error::Error;
};

/// A potential-kernel window does not cover the kernel it is paired with.
class CoverageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rwre
