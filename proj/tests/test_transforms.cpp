#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfree/infdiv.hpp"
#include "support.hpp"

using namespace cfree;
using namespace cfree::testing;

namespace {

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("cauchy_G examples") {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    const cplx z = random_upper(rng);
    CHECK(close(cauchy_G(dirac(0.0), z), 1.0 / z, 1e-14 * (1.0 + std::abs(1.0 / z))));
  }
  const cplx z{0.0, 2.0};
  CHECK(close(cauchy_G(bern(1.0), z), cplx{0.0, -0.4}, 1e-14));
  CHECK(close(cauchy_G(semicircle(0.0, 2.0), z), cplx{0.0, 1.0 - std::sqrt(2.0)}, 1e-6));
}

TEST_CASE("f and e transform examples") {
  std::mt19937 rng(5);
  for (int k = 0; k < 20; ++k) {
    const cplx z = random_upper(rng);
    CHECK(close(f_transform(dirac(0.3), z), z - 0.3, 1e-12 * (1.0 + std::abs(z))));
    CHECK(close(e_transform(dirac(0.3), z), cplx{0.3, 0.0}, 1e-12 * (1.0 + std::abs(z))));
    CHECK(close(f_transform(bern(1.0), z), z - 1.0 / z, 1e-12 * (1.0 + std::abs(z))));
    CHECK(close(e_transform(bern(1.0), z), 1.0 / z, 1e-12 * (1.0 + std::abs(z))));
  }
  CHECK(close(f_transform(semicircle(0.0, 2.0), {0.0, 2.0}), cplx{0.0, 1.0 + std::sqrt(2.0)}, 1e-5));
  const cplx z10{0.0, 10.0};
  CHECK(std::abs(e_transform(semicircle(0.0, 2.0), z10) - 1.0 / z10) <= 1e-2);
}

TEST_CASE("transform signs on the upper half-plane") {
  std::mt19937 rng(17);
  for (const auto& [name, m] : test_families()) {
    INFO(name);
    for (int k = 0; k < 100; ++k) {
      const cplx z = random_upper(rng);
      const double tol = 1e-12 * (1.0 + std::abs(z));
      CHECK(cauchy_G(m, z).imag() <= tol);
      CHECK(f_transform(m, z).imag() >= z.imag() - tol);
      CHECK(e_transform(m, z).imag() <= tol);
    }
  }
}

TEST_CASE("nontangential normalization") {
  for (const auto& [name, m] : test_families()) {
    INFO(name);
    const auto [lo, hi] = m.support_hull();
    const double y = 100.0 * std::max({std::abs(lo), std::abs(hi), 1.0});
    const cplx iy{0.0, y};
    CHECK(std::abs(f_transform(m, iy) / iy - 1.0) <= 0.05);
  }
}

TEST_CASE("validate_cone") {
  CHECK(validate_cone(dirac(0.0)).beta == 1.0);
  CHECK(validate_cone(bern(1.0)).beta <= 4.0);
  CHECK(validate_cone(semicircle(0.0, 2.0)).beta <= 4.0);
}

TEST_CASE("invert_F examples") {
  // The validated cones start at β = 2; these closed-form points sit on their
  // boundary, so the contexts are given the cone on which the roots are known.
  const TransformContext b{bern(1.0), {1.0, 1.0}};
  const cplx w{0.0, 2.0};
  const cplx z = invert_F(b, w);
  CHECK(std::abs(f_transform(bern(1.0), z) - w) <= 1e-10);
  // z − 1/z = w has the root (w + sqrt(w² + 4))/2; at w = 2i it is the
  // double root i, which Newton reaches only to about sqrt(tol).
  CHECK(close(z, (w + std::sqrt(w * w + 4.0)) / 2.0, 1e-5));

  const TransformContext s{semicircle(0.0, 2.0), {1.0, 1.0}};
  const cplx w3{0.0, 3.0};
  CHECK(std::abs(f_transform(s.measure, invert_F(s, w3)) - w3) <= 1e-10);
}

TEST_CASE("invert_F round trips on the cone") {
  for (const auto& [name, m] : test_families()) {
    INFO(name);
    const auto ctx = make_context(m);
    for (const cplx w : cone_points(ctx.cone, 100)) {
      const cplx z = invert_F(ctx, w);
      CHECK(std::abs(f_transform(m, z) - w) <= 1e-10 * (1.0 + std::abs(w)));
    }
    // The other direction, high in the cone.
    for (const cplx z : cone_points({1.0, 8.0 * ctx.cone.beta}, 20)) {
      CHECK(std::abs(invert_F(ctx, f_transform(m, z)) - z) <= 1e-9 * (1.0 + std::abs(z)));
    }
  }
}

TEST_CASE("phi_transform reductions") {
  const auto delta = make_context(dirac(0.0));
  const auto nu = make_context(semicircle(0.0, 2.0));
  const Measure mu = bern(0.7);
  for (const cplx z : cone_points(nu.cone, 20)) {
    CHECK(close(phi_transform(mu, delta, z), e_transform(mu, z), 1e-12));
    // Φ_(ν,ν) = F_ν⁻¹ − z.
    CHECK(close(phi_transform(nu.measure, nu, z), invert_F(nu, z) - z, 1e-10));
  }
}

TEST_CASE("phi of the Gaussian pair over the semicircle") {
  LevyHincinParams g;
  g.sigma = dirac(0.0);
  const CFreePair pair = cfree_limit_law({g, g});
  const TransformContext nu{semicircle(0.0, 2.0), {1.0, 1.0}};
  const cplx z{0.0, 2.0};
  CHECK(std::abs(phi_transform(pair.mu, nu, z) - 1.0 / z) <= 1e-3);
}
