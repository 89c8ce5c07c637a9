#pragma once

#include <algorithm>
#include <cmath>

namespace qpseudo {

// Scalar kernels shared by the eager path and the tape forward pass. Both
// sides must call these exact functions: Eigen's vectorized transcendentals
// round differently from std:: in the last ulp, which would break the
// value-identity contract between taped and untaped evaluation.

inline double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// arccos / arcosh over the clamped pre-image.
inline double acos(double x) { return std::acos(clamp(x, -1.0, 1.0)); }
inline double acosh(double x) { return std::acosh(std::max(1.0, x)); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// Inverse of softplus on (0, inf); used to seed curvature parameters.
inline double softplus_inverse(double y) {
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

}  // namespace qpseudo
