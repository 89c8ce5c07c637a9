#pragma once

#include <string>
#include <vector>

#include "qpseudo/types.hpp"

namespace qpseudo {

struct GeomCheckResult {
  std::string name;
  double max_err = 0.0;
  double tol = 0.0;
  long long n_samples = 0;
  long long violations = 0;  // counted checks (coverage)
  bool passed = true;
};

// Property sweep over one signature: membership and tangency closure,
// projection idempotence, exp/log round trips on connected pairs, the global
// diffeomorphic round trip (g-disconnected points included), the exact-zero
// leading tangent coordinate at o, antipodal coverage, transport norm
// preservation, distance symmetry, curvature rescaling, and the hyperbolic /
// spherical degenerations where the signature admits them.
std::vector<GeomCheckResult> run_geometry_checks(const Signature& sig, std::uint64_t seed,
                                                 int n_samples, long long n_coverage_pairs);

bool all_passed(const std::vector<GeomCheckResult>& results);

}  // namespace qpseudo
