#pragma once

#include <array>
#include <utility>
#include <vector>

#include "cfree/core.hpp"
#include "cfree/measure.hpp"

namespace cfree::detail {

/// Cauchy transform of a piecewise-linear density, ∫ p(t)/(z − t) dt.
///
/// Segments are integrated in closed form. They are also grouped in a binary
/// tree of panels; a panel far from z (|z − c| > 3r) is replaced by its
/// multipole series Σ M_k (z − c)^{−k−1} with exact moments about its center,
/// cut once (r/|z − c|)^k drops below 1e-17. Leaves hold at most kLeafSize
/// segments, so an evaluation costs O(log n) series plus a few direct segments.
class CauchyEvaluator {
 public:
  static constexpr int kTerms = 36;
  static constexpr Eigen::Index kLeafSize = 8;

  explicit CauchyEvaluator(const DensityGrid& density);

  cplx value(cplx z) const;
  /// (G(z), G'(z)).
  std::pair<cplx, cplx> value_and_derivative(cplx z) const;

 private:
  struct Panel {
    Eigen::Index first = 0;  // first segment
    Eigen::Index last = 0;   // one past the last segment
    double center = 0.0;
    double radius = 0.0;
    std::array<double, kTerms> moments{};  // M_k / radius^k
    int left = -1;
    int right = -1;
    bool empty = true;
  };

  int build(Eigen::Index first, Eigen::Index last);

  template <bool WithDerivative>
  std::pair<cplx, cplx> evaluate(cplx z) const;

  DensityGrid density_;
  std::vector<Panel> panels_;
};

}  // namespace cfree::detail
