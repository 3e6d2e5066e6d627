#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace apmionet {

/// Raised when a primitive is evaluated outside its domain (division by zero,
/// logarithm of a non-positive number). The message names the offending node.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Plain-real primitives. They live in this namespace so that generic code can
// call `exp(a)` unqualified for both `double` and tape variables.

inline double exp(double a) { return std::exp(a); }
inline double sin(double a) { return std::sin(a); }
inline double cos(double a) { return std::cos(a); }
inline double tanh(double a) { return std::tanh(a); }

inline double log(double a) {
  if (!(a > 0.0)) {
    throw DomainError("log of non-positive argument " + std::to_string(a) + " (untaped value)");
  }
  return std::log(a);
}

inline double reciprocal(double a) {
  if (a == 0.0) throw DomainError("division by zero (untaped value)");
  return 1.0 / a;
}

inline double sigmoid(double a) {
  if (a >= 0.0) {
    const double e = std::exp(-a);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

/// log(1 + e^a), evaluated without overflow.
inline double softplus(double a) { return std::log1p(std::exp(-std::abs(a))) + (a > 0.0 ? a : 0.0); }

inline double swish(double a) { return a * sigmoid(a); }

// Derivatives of swish(z) = z * sigmoid(z), shared by the scalar and batched paths.
inline double swish_d1(double z) {
  const double s = sigmoid(z);
  return s + z * s * (1.0 - s);
}

inline double swish_d2(double z) {
  const double s = sigmoid(z);
  const double q = s * (1.0 - s);
  return 2.0 * q + z * q * (1.0 - 2.0 * s);
}

inline double swish_d3(double z) {
  const double s = sigmoid(z);
  const double q = s * (1.0 - s);
  const double m = 1.0 - 2.0 * s;
  return 3.0 * q * m + z * q * (m * m - 2.0 * q);
}

}  // namespace apmionet
