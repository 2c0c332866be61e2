#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ptlab {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;

/// Thrown for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (files, arguments); reported as a usage error.
class InputError : public Error {
public:
  using Error::Error;
};

/// A value together with a flag raised when the inputs lie outside the
/// regime where the underlying asymptotic expression is trustworthy.
struct Flagged {
  double value = 0.0;
  bool out_of_regime = false;
  std::string note;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;

}  // namespace ptlab
