// Exception taxonomy shared by all pulsefocus modules.
#pragma once

#include <stdexcept>
#include <string>

namespace pulsefocus {

/// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Arguments outside their documented domain (negative widths, p <= 1, ...).
class InvalidParameterError : public Error {
  using Error::Error;
};

/// Parameters are valid but fall in a regime where the requested quantity has
/// no meaning (wrong side of the alpha vs p-2 threshold, wrong coupling sign).
class RegimeError : public Error {
  using Error::Error;
};

/// Pointwise evaluation outside the mathematical domain (F_p at x <= 0,
/// time-derivative reconstruction at r = 0, ...).
class DomainError : public Error {
  using Error::Error;
};

/// Closed-form evaluation requested past its validity window in time.
class ValidityError : public Error {
  using Error::Error;
};

/// The approximate solution's denominator vanished: accretive blow-up.
/// Carries the offending space-time point.
class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, double t, double r)
      : Error(what), t_(t), r_(r) {}
  double t() const noexcept { return t_; }
  double r() const noexcept { return r_; }

 private:
  double t_;
  double r_;
};

/// Experiment configuration problems: parse errors, schema violations,
/// regime-incompatible experiment kinds.
class ConfigError : public Error {
  using Error::Error;
};

/// An eps-rate fit was refused because grid error is not subdominant.
class RichardsonGateError : public Error {
  using Error::Error;
};

/// Filesystem problems while emitting reports.
class IoError : public Error {
  using Error::Error;
};

}  // namespace pulsefocus
