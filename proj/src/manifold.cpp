#include "qpseudo/manifold.hpp"

#include <cmath>

#include "qpseudo/core_ops.hpp"

namespace qpseudo {

namespace {
void check_dim(const Eigen::VectorXd& v, const Signature& sig, const char* what) {
  if (v.size() != sig.ambient_dim())
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(sig.ambient_dim()) + ", got " +
                         std::to_string(v.size()));
}
}  // namespace

double time_product(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Signature& sig) {
  check_dim(x, sig, "time_product");
  check_dim(y, sig, "time_product");
  return core::time_product<Eager>(x, y, sig);
}

PseudoPoint project_to_manifold(const Eigen::VectorXd& x, const Signature& sig) {
  check_dim(x, sig, "project_to_manifold");
  const double tn2 = x.head(sig.t + 1).squaredNorm();
  if (!(tn2 > 0.0))
    throw DegenerateInputError("project_to_manifold: zero time block");
  return PseudoPoint{core::phi_project<Eager>(x, sig, sig.abs_beta()), sig};
}

TangentVec project_to_tangent(const PseudoPoint& x, const Eigen::VectorXd& z) {
  check_dim(z, x.sig, "project_to_tangent");
  return TangentVec{core::tangent_project<Eager>(x.coords, z, x.sig), x};
}

bool is_g_connected(const PseudoPoint& x, const PseudoPoint& y) {
  if (x.sig != y.sig) throw SignatureMismatchError("is_g_connected: signature mismatch");
  return core::time_product<Eager>(x.coords, y.coords, x.sig) < x.sig.abs_beta();
}

PseudoPoint antipode(const PseudoPoint& x) { return PseudoPoint{-x.coords, x.sig}; }

PseudoPoint rescale_curvature(const PseudoPoint& x, double beta_new) {
  if (!(beta_new < 0.0))
    throw InvalidCurvatureError("rescale_curvature: beta' must be strictly negative");
  const double f = std::sqrt(beta_new / x.sig.beta);
  return PseudoPoint{f * x.coords, Signature(x.sig.s, x.sig.t, beta_new)};
}

PseudoPoint south_pole(const Signature& sig) {
  Eigen::VectorXd o = Eigen::VectorXd::Zero(sig.ambient_dim());
  o(0) = sig.radius();
  return PseudoPoint{o, sig};
}

double membership_error(const PseudoPoint& x) {
  return std::fabs(core::time_product<Eager>(x.coords, x.coords, x.sig) - x.sig.beta);
}

double tangency_error(const TangentVec& xi) {
  return std::fabs(core::time_product<Eager>(xi.base.coords, xi.coords, xi.base.sig));
}

PseudoPoint random_point(const Signature& sig, Rng& rng, double scale) {
  for (;;) {
    Eigen::VectorXd v(sig.ambient_dim());
    for (int i = 0; i < v.size(); ++i) v(i) = scale * rng.normal();
    if (v.head(sig.t + 1).squaredNorm() > 0.0) return project_to_manifold(v, sig);
  }
}

TangentVec random_tangent(const PseudoPoint& x, Rng& rng, double scale) {
  Eigen::VectorXd z(x.sig.ambient_dim());
  for (int i = 0; i < z.size(); ++i) z(i) = scale * rng.normal();
  return project_to_tangent(x, z);
}

}  // namespace qpseudo
