#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace qpseudo {

// Numerical tolerances used across the geometry stack (double precision).
inline constexpr double kTolManifold = 1e-9;
inline constexpr double kTolTangent = 1e-9;
inline constexpr double kTolNull = 1e-12;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidCurvatureError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SignatureMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised by log_map on a g-disconnected pair; carries the offending product.
struct DisconnectedError : std::runtime_error {
  double product;
  explicit DisconnectedError(double p)
      : std::runtime_error("points are not geodesically connected (<x,y>_t = " +
                           std::to_string(p) + ")"),
        product(p) {}
};

// Raised when a spherical log is requested at the exact antipode, where the
// geodesic direction is not unique.
struct AntipodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Identifies a pseudo-hyperboloid Q_beta^{s,t}. The ambient vector carries
// t+1 time coordinates followed by s space coordinates.
struct Signature {
  int s = 0;
  int t = 0;
  double beta = -1.0;

  Signature() = default;
  Signature(int s_, int t_, double beta_) : s(s_), t(t_), beta(beta_) {
    if (s < 0 || t < 0 || s + t < 1)
      throw DimensionError("signature requires s,t >= 0 and s+t >= 1");
    if (!(beta < 0.0))
      throw InvalidCurvatureError("curvature beta must be strictly negative");
  }

  int ambient_dim() const { return s + t + 1; }
  int time_dims() const { return t + 1; }
  double abs_beta() const { return -beta; }
  double radius() const { return std::sqrt(-beta); }

  bool operator==(const Signature& o) const {
    return s == o.s && t == o.t && beta == o.beta;
  }
  bool operator!=(const Signature& o) const { return !(*this == o); }
};

// A point of Q_beta^{s,t}, stored in ambient coordinates. Construct through
// project_to_manifold (or the trusted aggregate for known-good values).
struct PseudoPoint {
  Eigen::VectorXd coords;
  Signature sig;
};

// A vector of T_x Q_beta^{s,t} in ambient coordinates, with its base point.
struct TangentVec {
  Eigen::VectorXd coords;
  PseudoPoint base;
};

// Image of a point under the spherical diffeomorphism: u lies on the sphere
// of radius sqrt(|beta|) in R^{t+1}, v is the Euclidean space block.
struct ProductPoint {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double radius = 1.0;
};

// Tangent pair of the product manifold (spherical block, Euclidean block).
struct ProductTangent {
  Eigen::VectorXd sph;
  Eigen::VectorXd euc;
};

enum class GeodesicClass { TimeLike, Null, SpaceLike };

}  // namespace qpseudo
