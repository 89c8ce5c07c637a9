#pragma once

#include <functional>

#include "qpseudo/manifold.hpp"
#include "qpseudo/types.hpp"

namespace qpseudo {

GeodesicClass classify(const TangentVec& xi);

// gamma_{x->xi}(tau), stabilized back onto the manifold.
PseudoPoint geodesic(const PseudoPoint& x, const TangentVec& xi, double tau);

// exp_x(xi) = gamma_{x->xi}(1).
PseudoPoint exp_map(const PseudoPoint& x, const TangentVec& xi);

// Inverse of exp_x; defined on the normal neighborhood of x only. Throws
// DisconnectedError (carrying <x,y>_t) on a g-disconnected pair.
TangentVec log_map(const PseudoPoint& x, const PseudoPoint& y);

struct TransportResult {
  TangentVec vec;
  bool antipodal_fallback = false;  // transported to -y instead of y
};

// Parallel transport of zeta along x -> y; falls back to x -> -y for broken
// pairs, which makes the operation total. Preserves <zeta,zeta>_t.
TransportResult parallel_transport(const PseudoPoint& x, const PseudoPoint& y,
                                   const TangentVec& zeta);

// Broken-geodesic distance (total): arc length when g-connected, otherwise
// pi*sqrt(|beta|) + d(x, -y).
double distance(const PseudoPoint& x, const PseudoPoint& y);

// Spherical diffeomorphism Q_beta^{s,t} ~ S_{-beta}^t x R^s and its inverse.
ProductPoint psi(const PseudoPoint& x);
PseudoPoint psi_inv(const ProductPoint& z);

// Unit-sphere variant (cross-check reference): Q_beta^{s,t} ~ S_1^t x R^s.
ProductPoint psi_unit(const PseudoPoint& x);
PseudoPoint psi_unit_inv(const ProductPoint& z, double beta);

// Product-manifold log/exp: round sphere of radius sqrt(|beta|) on the time
// block, Euclidean on the space block, concatenated time-then-space.
ProductTangent product_log(const ProductPoint& z, const ProductPoint& base);
ProductPoint product_exp(const ProductTangent& xi, const ProductPoint& base);

// Diffeomorphic log/exp of Eq-style geodesic tools: total off the antipodal
// slice, including g-disconnected pairs. ref must have a zero space block.
TangentVec diff_log(const PseudoPoint& x, const PseudoPoint& ref);
PseudoPoint diff_exp(const TangentVec& xi);
PseudoPoint diff_exp(const Eigen::VectorXd& xi_coords, const PseudoPoint& ref);

// Tangential lift f^x = diff_exp o f o diff_log. f maps tangent coordinates
// at ref to tangent coordinates of out_sig (leading time coordinate zero).
using TangentMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
std::function<PseudoPoint(const PseudoPoint&)> tangential_lift(const TangentMap& f,
                                                               const PseudoPoint& ref,
                                                               const Signature& out_sig);

}  // namespace qpseudo
