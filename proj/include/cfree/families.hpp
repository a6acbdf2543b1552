#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "cfree/measure.hpp"

namespace cfree {

enum class Family {
  PointMass,     // (c)
  BernoulliSym,  // (h): mass 1/2 at ±h
  Semicircle,    // (center, radius)
  Arcsine,       // (center, radius)
  Gaussian,      // (mean, sd)
  FreePoisson,   // (rate, jump = 1)
};

/// Accepts both the short names used by the expression language (delta,
/// bernoulli, freepoisson) and the long ones (point_mass, bernoulli_sym, free_poisson).
Family parse_family(std::string_view name);
std::string_view family_name(Family family);

struct GridSettings {
  std::size_t grid_n = 2048;
  /// Overrides the automatic window for density families.
  std::optional<std::pair<double, double>> window;
};

/// Normalized probability measure of a standard family. Continuous parts are
/// stored as node values holding the exact mass of each dual cell, with zero
/// end nodes so the interpolant is continuous.
Measure make_family(Family family, std::span<const double> params, const GridSettings& grid = {});

inline Measure make_family(std::string_view name, std::span<const double> params,
                           const GridSettings& grid = {}) {
  return make_family(parse_family(name), params, grid);
}

inline Measure point_mass(double c) { return Measure::dirac(c); }
Measure bernoulli_sym(double h);
Measure semicircle(double center, double radius, const GridSettings& grid = {});
Measure arcsine(double center, double radius, const GridSettings& grid = {});
Measure gaussian(double mean, double sd, const GridSettings& grid = {});
Measure free_poisson(double rate, double jump = 1.0, const GridSettings& grid = {});

/// Builds a probability measure from a density known in closed form by
/// averaging it over dual cells of the grid. `edges` lists points where the
/// density may have an integrable square-root singularity.
Measure density_from_function(const std::function<double(double)>& pdf, double lo, double hi,
                              std::size_t grid_n, std::span<const double> edges = {});

}  // namespace cfree
