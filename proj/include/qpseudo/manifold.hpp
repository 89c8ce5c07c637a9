#pragma once

#include "qpseudo/rng.hpp"
#include "qpseudo/types.hpp"

namespace qpseudo {

// Signature-(t+1, s) scalar product <x,y>_t. Symmetric; throws on length
// mismatch.
double time_product(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Signature& sig);

// psi^{-1} o psi double projection onto Q_beta^{s,t}. Idempotent on manifold
// points; throws DegenerateInputError on a zero time block.
PseudoPoint project_to_manifold(const Eigen::VectorXd& x, const Signature& sig);

// Orthogonal (w.r.t. <.,.>_t) projection of z onto T_x. Idempotent.
TangentVec project_to_tangent(const PseudoPoint& x, const Eigen::VectorXd& z);

// True iff <x,y>_t < |beta|, i.e. y lies in the normal neighborhood of x.
bool is_g_connected(const PseudoPoint& x, const PseudoPoint& y);

PseudoPoint antipode(const PseudoPoint& x);

// Maps Q_beta -> Q_beta' by x -> sqrt(beta'/beta) x. Requires beta' < 0.
PseudoPoint rescale_curvature(const PseudoPoint& x, double beta_new);

// The reference point o = (sqrt(|beta|), 0, ..., 0).
PseudoPoint south_pole(const Signature& sig);

double membership_error(const PseudoPoint& x);
double tangency_error(const TangentVec& xi);

// Sampling helpers for property suites: Gaussian ambient draw projected to
// the manifold / tangent space.
PseudoPoint random_point(const Signature& sig, Rng& rng, double scale = 1.0);
TangentVec random_tangent(const PseudoPoint& x, Rng& rng, double scale = 1.0);

}  // namespace qpseudo
