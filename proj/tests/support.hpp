#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cfree/convolution.hpp"
#include "cfree/families.hpp"
#include "cfree/transforms.hpp"

namespace cfree::testing {

inline Measure fam(const std::string& name, std::vector<double> params, std::size_t grid_n = 2048) {
  GridSettings g;
  g.grid_n = grid_n;
  return make_family(name, params, g);
}

inline Measure dirac(double c) { return Measure::dirac(c); }
inline Measure bern(double h) { return bernoulli_sym(h); }

/// The six families used across the transform and inversion tests.
inline std::vector<std::pair<std::string, Measure>> test_families() {
  return {{"delta(0.7)", dirac(0.7)},
          {"bernoulli(1)", bern(1.0)},
          {"semicircle(0,2)", semicircle(0.0, 2.0)},
          {"arcsine(0,2)", fam("arcsine", {0.0, 2.0})},
          {"gaussian(0,1)", fam("gaussian", {0.0, 1.0})},
          {"freepoisson(1)", fam("freepoisson", {1.0})}};
}

/// Probability measure with 2–4 atoms in [−1, 1].
inline Measure random_atomic(std::mt19937& rng) {
  std::uniform_real_distribution<double> loc(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  const int n = 2 + static_cast<int>(rng() % 3);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({loc(rng), weight(rng)});
    total += atoms.back().mass;
  }
  for (auto& a : atoms) a.mass /= total;
  return Measure(atoms);
}

/// z with Im z in [0.05, 5] and Re z in [−5, 5].
inline cplx random_upper(std::mt19937& rng) {
  std::uniform_real_distribution<double> re(-5.0, 5.0);
  std::uniform_real_distribution<double> im(std::log(0.05), std::log(5.0));
  return {re(rng), std::exp(im(rng))};
}

/// Closed-form transform of semicircle(0, 2) on the upper half-plane.
inline cplx semicircle_G(cplx z) {
  cplx root = std::sqrt(z * z - 4.0);
  if ((root / z).real() < 0.0) root = -root;  // branch with G ~ 1/z
  return (z - root) / 2.0;
}

inline double rel_err(double got, double want, double floor = 1e-3) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace cfree::testing
