#include "qpseudo/geodesic.hpp"

#include <cmath>

#include "qpseudo/core_ops.hpp"

namespace qpseudo {

namespace {

void check_same_sig(const Signature& a, const Signature& b, const char* what) {
  if (a != b) throw SignatureMismatchError(std::string(what) + ": signature mismatch");
}

void check_based(const PseudoPoint& x, const TangentVec& xi, const char* what) {
  check_same_sig(x.sig, xi.base.sig, what);
  if ((x.coords - xi.base.coords).cwiseAbs().maxCoeff() > 1e-12)
    throw DimensionError(std::string(what) + ": tangent vector not based at x");
}

// Round-sphere log of radius R at base u; follows the arccos form with the
// clamped argument. Exact antipodes (degenerate direction) raise.
Eigen::VectorXd sphere_log(const Eigen::VectorXd& u, const Eigen::VectorXd& y, double R) {
  const double craw = u.dot(y) / (R * R);
  Eigen::VectorXd p = y - craw * u;
  const double np = p.norm();
  if (np == 0.0) {
    if (craw < 0.0) throw AntipodeError("sphere log at the exact antipode");
    return Eigen::VectorXd::Zero(u.size());
  }
  const double phi = acos(craw);
  return (R * phi / np) * p;
}

Eigen::VectorXd sphere_exp(const Eigen::VectorXd& u, const Eigen::VectorXd& w, double R) {
  const double nw = w.norm();
  if (nw == 0.0) return u;
  return std::cos(nw / R) * u + (R * std::sin(nw / R) / nw) * w;
}

bool is_pole_form(const PseudoPoint& ref) {
  if (!(ref.coords(0) > 0.0)) return false;
  for (int i = 1; i < ref.coords.size(); ++i)
    if (ref.coords(i) != 0.0) return false;
  return true;
}

void check_zero_space_ref(const PseudoPoint& ref, const char* what) {
  const Signature& sig = ref.sig;
  if (sig.s > 0 && ref.coords.tail(sig.s).cwiseAbs().maxCoeff() > 1e-12)
    throw DegenerateInputError(std::string(what) +
                               ": reference point must have a zero space block");
}

}  // namespace

GeodesicClass classify(const TangentVec& xi) {
  const double q = core::time_product<Eager>(xi.coords, xi.coords, xi.base.sig);
  if (std::fabs(q) <= kTolNull) return GeodesicClass::Null;
  return q > 0.0 ? GeodesicClass::SpaceLike : GeodesicClass::TimeLike;
}

PseudoPoint geodesic(const PseudoPoint& x, const TangentVec& xi, double tau) {
  check_based(x, xi, "geodesic");
  Eigen::VectorXd g = core::geodesic_point<Eager>(x.coords, xi.coords, tau, x.sig, x.sig.abs_beta());
  return PseudoPoint{core::phi_project<Eager>(g, x.sig, x.sig.abs_beta()), x.sig};
}

PseudoPoint exp_map(const PseudoPoint& x, const TangentVec& xi) {
  check_based(x, xi, "exp_map");
  return PseudoPoint{core::exp_map<Eager>(x.coords, xi.coords, x.sig, x.sig.abs_beta()), x.sig};
}

TangentVec log_map(const PseudoPoint& x, const PseudoPoint& y) {
  check_same_sig(x.sig, y.sig, "log_map");
  return TangentVec{core::log_map<Eager>(x.coords, y.coords, x.sig, x.sig.abs_beta()), x};
}

TransportResult parallel_transport(const PseudoPoint& x, const PseudoPoint& y,
                                   const TangentVec& zeta) {
  check_based(x, zeta, "parallel_transport");
  check_same_sig(x.sig, y.sig, "parallel_transport");
  auto [vec, fallback] =
      core::parallel_transport<Eager>(x.coords, y.coords, zeta.coords, x.sig, x.sig.abs_beta());
  PseudoPoint base = fallback ? antipode(y) : y;
  return TransportResult{TangentVec{std::move(vec), std::move(base)}, fallback};
}

double distance(const PseudoPoint& x, const PseudoPoint& y) {
  check_same_sig(x.sig, y.sig, "distance");
  return core::distance<Eager>(x.coords, y.coords, x.sig, x.sig.abs_beta());
}

ProductPoint psi(const PseudoPoint& x) {
  const Signature& sig = x.sig;
  const Eigen::VectorXd tb = x.coords.head(sig.t + 1);
  const double tn = tb.norm();
  if (!(tn > 0.0)) throw DegenerateInputError("psi: zero time block");
  const double R = sig.radius();
  return ProductPoint{(R / tn) * tb, x.coords.tail(sig.s), R};
}

PseudoPoint psi_inv(const ProductPoint& z) {
  const int t = static_cast<int>(z.u.size()) - 1;
  const int s = static_cast<int>(z.v.size());
  const double beta = -z.radius * z.radius;
  Signature sig(s, t, beta);
  const double lift = std::sqrt(sig.abs_beta() + z.v.squaredNorm()) / z.radius;
  Eigen::VectorXd coords(sig.ambient_dim());
  coords.head(t + 1) = lift * z.u;
  if (s > 0) coords.tail(s) = z.v;
  return PseudoPoint{std::move(coords), sig};
}

ProductPoint psi_unit(const PseudoPoint& x) {
  const Signature& sig = x.sig;
  const Eigen::VectorXd tb = x.coords.head(sig.t + 1);
  const double tn = tb.norm();
  if (!(tn > 0.0)) throw DegenerateInputError("psi_unit: zero time block");
  return ProductPoint{tb / tn, x.coords.tail(sig.s) / sig.radius(), 1.0};
}

PseudoPoint psi_unit_inv(const ProductPoint& z, double beta) {
  if (!(beta < 0.0)) throw InvalidCurvatureError("psi_unit_inv: beta must be negative");
  const int t = static_cast<int>(z.u.size()) - 1;
  const int s = static_cast<int>(z.v.size());
  Signature sig(s, t, beta);
  const double R = sig.radius();
  Eigen::VectorXd coords(sig.ambient_dim());
  coords.head(t + 1) = R * std::sqrt(1.0 + z.v.squaredNorm()) * z.u;
  if (s > 0) coords.tail(s) = R * z.v;
  return PseudoPoint{std::move(coords), sig};
}

ProductTangent product_log(const ProductPoint& z, const ProductPoint& base) {
  if (z.u.size() != base.u.size() || z.v.size() != base.v.size())
    throw DimensionError("product_log: component size mismatch");
  return ProductTangent{sphere_log(base.u, z.u, base.radius), z.v - base.v};
}

ProductPoint product_exp(const ProductTangent& xi, const ProductPoint& base) {
  if (xi.sph.size() != base.u.size() || xi.euc.size() != base.v.size())
    throw DimensionError("product_exp: component size mismatch");
  return ProductPoint{sphere_exp(base.u, xi.sph, base.radius), base.v + xi.euc, base.radius};
}

TangentVec diff_log(const PseudoPoint& x, const PseudoPoint& ref) {
  check_same_sig(x.sig, ref.sig, "diff_log");
  check_zero_space_ref(ref, "diff_log");
  const Signature& sig = x.sig;
  if (is_pole_form(ref))
    return TangentVec{core::diff_log_pole<Eager>(x.coords, sig, sig.abs_beta()), ref};
  ProductPoint zx = psi(x);
  Eigen::VectorXd w = sphere_log(ref.coords.head(sig.t + 1), zx.u, sig.radius());
  Eigen::VectorXd coords(sig.ambient_dim());
  coords.head(sig.t + 1) = w;
  if (sig.s > 0) coords.tail(sig.s) = zx.v;
  return TangentVec{std::move(coords), ref};
}

PseudoPoint diff_exp(const Eigen::VectorXd& xi_coords, const PseudoPoint& ref) {
  check_zero_space_ref(ref, "diff_exp");
  const Signature& sig = ref.sig;
  if (xi_coords.size() != sig.ambient_dim())
    throw DimensionError("diff_exp: tangent coordinate length mismatch");
  if (is_pole_form(ref))
    return PseudoPoint{core::diff_exp_pole<Eager>(xi_coords, sig, sig.abs_beta()), sig};
  Eigen::VectorXd u = sphere_exp(ref.coords.head(sig.t + 1), xi_coords.head(sig.t + 1),
                                 sig.radius());
  return psi_inv(ProductPoint{std::move(u), xi_coords.tail(sig.s), sig.radius()});
}

PseudoPoint diff_exp(const TangentVec& xi) { return diff_exp(xi.coords, xi.base); }

std::function<PseudoPoint(const PseudoPoint&)> tangential_lift(const TangentMap& f,
                                                               const PseudoPoint& ref,
                                                               const Signature& out_sig) {
  check_zero_space_ref(ref, "tangential_lift");
  PseudoPoint out_ref = south_pole(out_sig);
  return [f, ref, out_ref, out_sig](const PseudoPoint& y) {
    Eigen::VectorXd xi = diff_log(y, ref).coords;
    Eigen::VectorXd eta = f(xi);
    if (eta.size() != out_sig.ambient_dim())
      throw DimensionError("tangential_lift: mapped tangent has wrong length");
    return diff_exp(eta, out_ref);
  };
}

}  // namespace qpseudo
