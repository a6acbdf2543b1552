#pragma once

#include <functional>
#include <span>
#include <utility>

#include "cfree/measure.hpp"

namespace cfree {

/// A Cauchy transform sampled on the upper half-plane.
using CauchyFn = std::function<cplx(cplx)>;

struct InversionSettings {
  std::size_t grid_n = 2048;
  /// Strictly decreasing heights; empty means (h, h/2, h/4) with h the grid step.
  std::vector<double> y_ladder;
  /// y·(−Im G) at the smallest height above which a point is probed for an atom.
  double atom_threshold = 1e-3;
  /// Largest tolerated |1 − recovered mass| before renormalizing.
  double mass_tolerance = 0.02;
};

/// Recovers the probability measure whose Cauchy transform is G.
///
/// Atoms are located as peaks of y·(−Im G(x+iy)) that persist as y shrinks and
/// removed from G before the density is read off. Node values are averages of
/// −Im G/π over the dual cell, extrapolated to y = 0 by polynomial fit across
/// the ladder. The result is renormalized when the mass defect is within
/// tolerance.
Measure stieltjes_invert(const CauchyFn& G, double lo, double hi,
                         const InversionSettings& settings = {});

/// As stieltjes_invert, but widens the window (×1.5 about its center, up to six
/// times) while mass is missing or the density is still large at an edge.
Measure stieltjes_invert_auto(const CauchyFn& G, double lo, double hi,
                              const InversionSettings& settings = {});

}  // namespace cfree
