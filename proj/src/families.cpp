#include "cfree/families.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace cfree {

namespace {

using Gauss10 = boost::math::quadrature::gauss<double, 10>;

// Integrates f over [a, b]; an endpoint flagged singular gets the substitution
// x = e ± w s², which removes inverse-square-root behaviour there.
double integrate_piece(const std::function<double(double)>& f, double a, double b, bool sing_a,
                       bool sing_b) {
  if (b <= a) return 0.0;
  if (sing_a && sing_b) {
    const double mid = 0.5 * (a + b);
    return integrate_piece(f, a, mid, true, false) + integrate_piece(f, mid, b, false, true);
  }
  const double w = b - a;
  if (sing_a)
    return Gauss10::integrate([&](double s) { return f(a + w * s * s) * 2.0 * w * s; }, 0.0, 1.0);
  if (sing_b)
    return Gauss10::integrate([&](double s) { return f(b - w * s * s) * 2.0 * w * s; }, 0.0, 1.0);
  return Gauss10::integrate(f, a, b);
}

void check_params(std::span<const double> params, std::size_t min_count, std::size_t max_count,
                  std::string_view family) {
  require(params.size() >= min_count && params.size() <= max_count,
          "wrong number of parameters for family " + std::string(family));
  for (double p : params) require(std::isfinite(p), "family parameters must be finite");
}

}  // namespace

Family parse_family(std::string_view name) {
  if (name == "delta" || name == "point_mass") return Family::PointMass;
  if (name == "bernoulli" || name == "bernoulli_sym") return Family::BernoulliSym;
  if (name == "semicircle") return Family::Semicircle;
  if (name == "arcsine") return Family::Arcsine;
  if (name == "gaussian") return Family::Gaussian;
  if (name == "freepoisson" || name == "free_poisson") return Family::FreePoisson;
  throw PreconditionError("unknown family '" + std::string(name) + "'");
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::PointMass: return "delta";
    case Family::BernoulliSym: return "bernoulli";
    case Family::Semicircle: return "semicircle";
    case Family::Arcsine: return "arcsine";
    case Family::Gaussian: return "gaussian";
    case Family::FreePoisson: return "freepoisson";
  }
  return "";
}

Measure density_from_function(const std::function<double(double)>& pdf, double lo, double hi,
                              std::size_t grid_n, std::span<const double> edges) {
  require(grid_n >= 3, "density grid needs at least three nodes");
  require(hi > lo, "density window must have positive width");
  const auto n = static_cast<Eigen::Index>(grid_n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> singular(edges.begin(), edges.end());
  std::sort(singular.begin(), singular.end());

  Eigen::VectorXd cell_mass(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = lo + h * static_cast<double>(j);
    const double a = std::max(lo, x - 0.5 * h);
    const double b = std::min(hi, x + 0.5 * h);
    std::vector<double> cuts{a};
    for (double e : singular)
      if (e > a && e < b) cuts.push_back(e);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      auto is_edge = [&](double p) {
        return std::any_of(singular.begin(), singular.end(),
                           [&](double e) { return std::abs(e - p) <= 1e-14 * (1.0 + std::abs(e)); });
      };
      total += integrate_piece(pdf, cuts[k], cuts[k + 1], is_edge(cuts[k]), is_edge(cuts[k + 1]));
    }
    cell_mass[j] = std::max(0.0, total);
  }
  // Zero end nodes; their half-cell mass goes to the neighbour.
  cell_mass[1] += cell_mass[0];
  cell_mass[n - 2] += cell_mass[n - 1];
  cell_mass[0] = 0.0;
  cell_mass[n - 1] = 0.0;
  const double total = cell_mass.sum();
  require(total > 0.0, "density has no mass in the window");

  DensityGrid grid;
  grid.start = lo;
  grid.step = h;
  grid.values = cell_mass / (total * h);
  return Measure({}, std::move(grid));
}

Measure bernoulli_sym(double h) {
  require(h > 0.0 && std::isfinite(h), "bernoulli half-width must be positive");
  return Measure({{-h, 0.5}, {h, 0.5}});
}

Measure semicircle(double center, double radius, const GridSettings& grid) {
  require(radius > 0.0, "semicircle radius must be positive");
  const auto [lo, hi] = grid.window.value_or(std::pair{center - radius, center + radius});
  const double edges[] = {center - radius, center + radius};
  return density_from_function(
      [=](double x) {
        const double u = radius * radius - (x - center) * (x - center);
        return u > 0.0 ? 2.0 / (kPi * radius * radius) * std::sqrt(u) : 0.0;
      },
      lo, hi, grid.grid_n, edges);
}

Measure arcsine(double center, double radius, const GridSettings& grid) {
  require(radius > 0.0, "arcsine radius must be positive");
  const auto [lo, hi] = grid.window.value_or(std::pair{center - radius, center + radius});
  const double edges[] = {center - radius, center + radius};
  return density_from_function(
      [=](double x) {
        const double u = radius * radius - (x - center) * (x - center);
        return u > 0.0 ? 1.0 / (kPi * std::sqrt(u)) : 0.0;
      },
      lo, hi, grid.grid_n, edges);
}

Measure gaussian(double mean, double sd, const GridSettings& grid) {
  require(sd > 0.0, "gaussian standard deviation must be positive");
  // all but 1e-6 of the mass
  static const double z = std::sqrt(2.0) * boost::math::erfc_inv(1e-6);
  const auto [lo, hi] = grid.window.value_or(std::pair{mean - z * sd, mean + z * sd});
  return density_from_function(
      [=](double x) {
        const double u = (x - mean) / sd;
        return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * kPi));
      },
      lo, hi, grid.grid_n);
}

Measure free_poisson(double rate, double jump, const GridSettings& grid) {
  require(rate > 0.0, "free Poisson rate must be positive");
  require(jump > 0.0, "free Poisson jump size must be positive");
  const double a = jump * std::pow(1.0 - std::sqrt(rate), 2);
  const double b = jump * std::pow(1.0 + std::sqrt(rate), 2);
  const auto [lo, hi] = grid.window.value_or(std::pair{a, b});
  const double edges[] = {a, b};
  const Measure continuous = density_from_function(
      [=](double x) {
        if (x <= a || x >= b) return 0.0;
        return std::sqrt((b - x) * (x - a)) / (2.0 * kPi * jump * x);
      },
      lo, hi, grid.grid_n, edges);
  if (rate >= 1.0) return continuous;
  DensityGrid d = *continuous.density();
  d.values *= rate;
  return Measure({{0.0, 1.0 - rate}}, std::move(d));
}

Measure make_family(Family family, std::span<const double> params, const GridSettings& grid) {
  const auto name = family_name(family);
  switch (family) {
    case Family::PointMass:
      check_params(params, 1, 1, name);
      return point_mass(params[0]);
    case Family::BernoulliSym:
      check_params(params, 1, 1, name);
      return bernoulli_sym(params[0]);
    case Family::Semicircle:
      check_params(params, 2, 2, name);
      return semicircle(params[0], params[1], grid);
    case Family::Arcsine:
      check_params(params, 2, 2, name);
      return arcsine(params[0], params[1], grid);
    case Family::Gaussian:
      check_params(params, 2, 2, name);
      return gaussian(params[0], params[1], grid);
    case Family::FreePoisson:
      check_params(params, 1, 2, name);
      return free_poisson(params[0], params.size() > 1 ? params[1] : 1.0, grid);
  }
  throw PreconditionError("unknown family");
}

}  // namespace cfree
