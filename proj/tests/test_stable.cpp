#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfree/stable.hpp"
#include "support.hpp"

using namespace cfree;
using namespace cfree::testing;

namespace {

std::vector<StableFunction> catalogue() {
  return {
      make_stable(StableFamily::Constant, 3.0, 0.0),
      make_stable(StableFamily::Constant, -1.0, -2.0),
      make_stable(StableFamily::PowerHigh, 0.0, 1.0, 2.0),
      make_stable(StableFamily::PowerHigh, 0.5, std::polar(1.0, -0.25 * kPi), 1.5),
      make_stable(StableFamily::PowerHigh, -0.3, std::polar(2.0, -0.5 * kPi), 1.5),
      make_stable(StableFamily::PowerLow, 0.2, std::polar(1.0, -0.75 * kPi), 0.5),
      make_stable(StableFamily::PowerLow, 0.0, std::polar(0.5, -kPi), 0.3),
      make_stable(StableFamily::Log, cplx{1.0, -0.5}, -1.0),
      make_stable(StableFamily::Log, 0.0, -0.25),
  };
}

StableFunction inverse_z() { return make_stable(StableFamily::PowerHigh, 0.0, 1.0, 2.0); }

CFreePair gaussian_limit() {
  LevyHincinParams g;
  g.sigma = Measure::dirac(0.0);
  return cfree_limit_law({g, g});
}

}  // namespace

TEST_CASE("eval_stable examples") {
  const auto c = make_stable(StableFamily::Constant, 3.0, 0.0);
  for (const cplx z : {cplx{0.0, 1.0}, cplx{-2.0, 0.1}, cplx{5.0, 7.0}}) CHECK(eval_stable(c, z) == cplx{3.0, 0.0});
  CHECK(std::abs(eval_stable(inverse_z(), {0.0, 2.0}) - cplx{0.0, -0.5}) <= 1e-15);
  const auto l = make_stable(StableFamily::Log, 0.0, -1.0);
  CHECK(std::abs(eval_stable(l, {0.0, 1.0}) - cplx{0.0, -kPi / 2.0}) <= 1e-15);
}

TEST_CASE("catalogue maps the upper half-plane into the closed lower half-plane") {
  std::mt19937 rng(31);
  for (const auto& f : catalogue()) {
    INFO(stable_family_name(f.family));
    for (int k = 0; k < 200; ++k) CHECK(eval_stable(f, random_upper(rng)).imag() <= 1e-12);
  }
}

TEST_CASE("eval_stable_derivative matches a central difference") {
  const cplx z{0.7, 1.3};
  const double h = 1e-6;
  for (const auto& f : catalogue()) {
    INFO(stable_family_name(f.family));
    const cplx fd = (eval_stable(f, z + h) - eval_stable(f, z - h)) / (2.0 * h);
    CHECK(std::abs(eval_stable_derivative(f, z).second - fd) <= 1e-7 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(make_stable(StableFamily::Constant, cplx{1.0, 0.5}, 0.0), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::Constant, 1.0, 0.5), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::PowerHigh, 0.0, 0.0, 2.0), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::PowerHigh, 0.0, 1.0, 2.5), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::PowerHigh, 0.0, std::polar(1.0, 0.1), 1.5), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::PowerLow, 0.0, std::polar(1.0, -0.1), 0.5), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::PowerLow, 0.0, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::Log, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_stable(StableFamily::Log, cplx{0.0, 1.0}, -1.0), PreconditionError);
  CHECK_THROWS_AS(parse_stable_family("cauchy"), PreconditionError);
  CHECK_THROWS_AS(check_stability(inverse_z(), 0.0), PreconditionError);
}

TEST_CASE("check_stability on the catalogue") {
  for (const auto& f : catalogue())
    for (const double a : {0.5, 1.0, 2.0}) {
      INFO(stable_family_name(f.family), " a_test=", a);
      const StabilityResult r = check_stability(f, a);
      CHECK(r.b > 0.0);
      CHECK(r.residual <= 1e-10);
    }
  const StabilityResult g = check_stability(inverse_z(), 1.0);
  CHECK(g.b == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(g.c) <= 1e-14);
  CHECK(g.residual <= 1e-12);
  const StabilityResult c = check_stability(make_stable(StableFamily::Constant, 5.0, 0.0), 2.0);
  CHECK(c.b == 1.0);
  CHECK(c.c == doctest::Approx(2.5));
}

TEST_CASE("numeric stability check") {
  // The black-box search agrees with the closed form on a catalogue member.
  const auto f = make_stable(StableFamily::PowerHigh, 0.5, std::polar(1.0, -0.25 * kPi), 1.5);
  const StabilityResult r = check_stability([&](cplx z) { return eval_stable(f, z); }, 2.0);
  CHECK(r.residual <= 1e-8);
  CHECK(r.b == doctest::Approx(check_stability(f, 2.0).b).epsilon(1e-6));

  const Measure two_atom({{-1.0, 0.3}, {2.0, 0.7}});
  for (const double a : {0.5, 1.0, 2.0}) {
    const StabilityResult bad = check_stability([&](cplx z) { return e_transform(two_atom, z); }, a);
    CHECK(bad.residual > 1e-3);
  }
}

TEST_CASE("make_stable_pair with phi = psi = 1/z is the c-free Gaussian") {
  const CFreePair p = make_stable_pair(inverse_z(), inverse_z());
  const CFreePair want = gaussian_limit();
  CHECK(levy_distance(p.mu, want.mu) <= 1e-2);
  CHECK(levy_distance(p.nu, want.nu) <= 1e-2);
  CHECK(levy_distance(p.nu, semicircle(0.0, 2.0)) <= 1e-2);
  CHECK(check_infdiv(p).accepted());
}

TEST_CASE("make_stable_pair with constants gives point masses") {
  const CFreePair p = make_stable_pair(make_stable(StableFamily::Constant, 0.4, 0.0),
                                       make_stable(StableFamily::Constant, -1.5, 0.0));
  CHECK(levy_distance(p.mu, Measure::dirac(0.4)) <= 1e-12);
  CHECK(levy_distance(p.nu, Measure::dirac(-1.5)) <= 1e-12);
}

TEST_CASE("stable pairs from the power family are infinitely divisible") {
  const auto phi = make_stable(StableFamily::PowerHigh, 0.2, std::polar(1.0, -0.2 * kPi), 1.8);
  const auto psi = make_stable(StableFamily::PowerHigh, 0.0, std::polar(0.8, -0.1 * kPi), 1.8);
  const CFreePair p = make_stable_pair(phi, psi);
  CHECK(p.mu.is_probability(1e-2));
  CHECK(p.nu.is_probability(1e-2));
  // The carried transforms are the exact ones: F_ν⁻¹(z) − z = ψ(z) on the cone.
  const TruncatedCone cone{1.0, 4.0};
  for (const cplx z : cone_points(cone, 10)) {
    const cplx w = z + eval_stable(psi, z);
    CHECK(std::abs(1.0 / p.g_nu(w) - z) <= 1e-8 * std::abs(z));
  }
}

TEST_CASE("phi covariance under affine maps") {
  std::mt19937 rng(41);
  for (const AffineMap map : {AffineMap{2.0, 0.0}, AffineMap{2.0, 0.3}, AffineMap{0.5, -0.2}}) {
    const CFreePair p = make_pair(random_atomic(rng), random_atomic(rng));
    const CFreePair q = push_pair(p, map);
    const TransformContext ctx_p = make_context(p.nu);
    const TransformContext ctx_q = make_context(q.nu);
    const double beta = 2.0 * std::max(ctx_p.cone.beta, ctx_q.cone.beta) / std::min(map.a, 1.0);
    for (const cplx z : cone_points({1.0, beta}, 20)) {
      const cplx lhs = phi_transform(q.mu, ctx_q, z);
      const cplx rhs = (phi_transform(p.mu, ctx_p, map.a * z) - map.b) / map.a;
      CHECK(std::abs(lhs - rhs) <= 1e-6);
    }
  }
}

TEST_CASE("push_pair carries the transforms") {
  const CFreePair p = gaussian_limit();
  const AffineMap map{0.7, 0.2};
  const CFreePair q = push_pair(p, map);
  const cplx z{0.3, 1.1};
  CHECK(std::abs(q.g_nu(z) - cauchy_G(push_affine(p.nu, map), z)) <= 1e-4);
  CHECK(std::abs(q.g_mu(z) - cauchy_G(push_affine(p.mu, map), z)) <= 1e-4);
  CHECK_THROWS_AS(push_pair(p, {-1.0, 0.0}), PreconditionError);
}

TEST_CASE("stability closure") {
  const CFreePair p = make_stable_pair(inverse_z(), inverse_z());
  const CFreePair sum = cfree_conv(p, push_pair(p, {0.8, 0.1}));
  const AffineMap map = fit_equivalence(p, sum);
  CHECK(levy_distance(p.mu, push_affine(sum.mu, map)) <= 1e-2);
  CHECK(levy_distance(p.nu, push_affine(sum.nu, map)) <= 1e-2);
}
