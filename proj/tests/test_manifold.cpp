#include <doctest.h>

#include <cmath>

#include "qpseudo/geodesic.hpp"
#include "qpseudo/manifold.hpp"

using namespace qpseudo;

namespace {
Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("time_product evaluates the signature-(t+1,s) form") {
  Signature sig(1, 1, -1.0);
  CHECK(time_product(vec3(1, 0, 0), vec3(1, 0, 0), sig) == doctest::Approx(-1.0));
  CHECK(time_product(vec3(1, 1, 1), vec3(1, 1, 1), sig) == doctest::Approx(-1.0));
  CHECK(time_product(vec3(0, 1, 0), vec3(0, 0, 1), sig) == doctest::Approx(0.0));
  // symmetry
  Eigen::VectorXd a = vec3(0.3, -1.2, 2.0), b = vec3(1.5, 0.25, -0.75);
  CHECK(time_product(a, b, sig) == time_product(b, a, sig));
  CHECK_THROWS_AS(time_product(vec2(1, 0), vec3(1, 0, 0), sig), DimensionError);
}

TEST_CASE("project_to_manifold normalizes the time block") {
  Signature s10(1, 0, -1.0);
  PseudoPoint p = project_to_manifold(vec2(std::sqrt(2.0), 1.0), s10);
  CHECK((p.coords - vec2(std::sqrt(2.0), 1.0)).cwiseAbs().maxCoeff() <= 1e-12);

  Signature sig(1, 1, -1.0);
  PseudoPoint q = project_to_manifold(vec3(1, 1, 1), sig);
  CHECK((q.coords - vec3(1, 1, 1)).cwiseAbs().maxCoeff() <= 1e-12);

  PseudoPoint r = project_to_manifold(vec3(2, 0, 0), sig);
  CHECK((r.coords - vec3(1, 0, 0)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(project_to_manifold(vec3(0, 0, 1), sig), DegenerateInputError);
}

TEST_CASE("projection is idempotent and closes membership") {
  Rng rng(7);
  for (const Signature& sig :
       {Signature(2, 1, -1.0), Signature(1, 2, -0.25), Signature(5, 5, -4.0),
        Signature(3, 0, -1.0), Signature(0, 3, -2.0)}) {
    for (int k = 0; k < 200; ++k) {
      PseudoPoint x = random_point(sig, rng);
      CHECK(membership_error(x) <= kTolManifold);
      PseudoPoint x2 = project_to_manifold(x.coords, sig);
      CHECK((x.coords - x2.coords).cwiseAbs().maxCoeff() <= kTolManifold);
    }
  }
}

TEST_CASE("project_to_tangent removes the radial component") {
  Signature sig(1, 1, -1.0);
  PseudoPoint x{vec3(1, 0, 0), sig};
  CHECK((project_to_tangent(x, vec3(0, 1, 0)).coords - vec3(0, 1, 0)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(project_to_tangent(x, vec3(1, 0, 0)).coords.cwiseAbs().maxCoeff() == 0.0);
  CHECK((project_to_tangent(x, vec3(1, 1, 1)).coords - vec3(0, 1, 1)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("tangent projection is idempotent and closes tangency") {
  Rng rng(11);
  Signature sig(3, 2, -1.5);
  for (int k = 0; k < 200; ++k) {
    PseudoPoint x = random_point(sig, rng);
    TangentVec xi = random_tangent(x, rng);
    CHECK(tangency_error(xi) <= kTolTangent);
    TangentVec xi2 = project_to_tangent(x, xi.coords);
    CHECK((xi.coords - xi2.coords).cwiseAbs().maxCoeff() <= kTolTangent);
  }
}

TEST_CASE("g-connectedness follows the normal-neighborhood rule") {
  Signature sig(1, 1, -1.0);
  PseudoPoint x{vec3(1, 0, 0), sig};
  PseudoPoint y{vec3(0, 1, 0), sig};
  CHECK(is_g_connected(x, y));
  CHECK_FALSE(is_g_connected(x, antipode(x)));
  CHECK(is_g_connected(x, x));
  PseudoPoint z{vec3(1, 0, 0), Signature(1, 1, -2.0)};
  CHECK_THROWS_AS(is_g_connected(x, z), SignatureMismatchError);
}

TEST_CASE("antipode negates coordinates") {
  Signature sig(1, 1, -1.0);
  PseudoPoint x{vec3(1, 0, 0), sig};
  CHECK((antipode(x).coords - vec3(-1, 0, 0)).cwiseAbs().maxCoeff() == 0.0);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    PseudoPoint p = random_point(sig, rng);
    CHECK((antipode(antipode(p)).coords - p.coords).cwiseAbs().maxCoeff() == 0.0);
    CHECK(time_product(p.coords, antipode(p).coords, sig) == doctest::Approx(-sig.beta));
    CHECK(membership_error(antipode(p)) <= kTolManifold);
  }
}

TEST_CASE("curvature rescaling maps between pseudo-hyperboloids") {
  Signature sig(1, 1, -1.0);
  PseudoPoint x{vec3(1, 0, 0), sig};
  PseudoPoint y = rescale_curvature(x, -4.0);
  CHECK((y.coords - vec3(2, 0, 0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(y.sig.beta == -4.0);
  CHECK(membership_error(y) <= kTolManifold);

  PseudoPoint same = rescale_curvature(x, -1.0);
  CHECK((same.coords - x.coords).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(rescale_curvature(x, 1.0), InvalidCurvatureError);

  // scalar products scale by beta/beta'
  Rng rng(5);
  Signature big(2, 2, -0.5);
  for (int k = 0; k < 50; ++k) {
    PseudoPoint a = random_point(big, rng);
    PseudoPoint b = random_point(big, rng);
    const double p0 = time_product(a.coords, b.coords, big);
    const double p1 = time_product(rescale_curvature(a, -3.0).coords,
                                   rescale_curvature(b, -3.0).coords,
                                   Signature(2, 2, -3.0));
    CHECK(p0 == doctest::Approx((-3.0 / big.beta) * p0 * (big.beta / -3.0)));
    CHECK(p1 == doctest::Approx((-3.0 / big.beta) * p0).epsilon(1e-10));
  }
}

TEST_CASE("antipodal neighborhoods cover the manifold") {
  Rng rng(17);
  for (const Signature& sig : {Signature(2, 1, -1.0), Signature(0, 3, -0.25)}) {
    for (int k = 0; k < 2000; ++k) {
      PseudoPoint x = random_point(sig, rng);
      PseudoPoint y = random_point(sig, rng);
      CHECK((is_g_connected(x, y) || is_g_connected(antipode(x), y)));
    }
  }
}

TEST_CASE("south pole lies on the manifold") {
  for (const Signature& sig : {Signature(2, 1, -1.0), Signature(5, 5, -4.0)}) {
    PseudoPoint o = south_pole(sig);
    CHECK(membership_error(o) <= 1e-15);
    CHECK(o.coords(0) == sig.radius());
  }
}
