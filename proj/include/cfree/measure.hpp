#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cfree/core.hpp"

namespace cfree {

namespace detail {
class CauchyEvaluator;
}

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// Piecewise-linear density sampled on a uniform grid. Mass is the exact
/// integral of the interpolant (the trapezoidal sum of the node values).
struct DensityGrid {
  double start = 0.0;
  double step = 1.0;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  double node(Eigen::Index i) const { return start + step * static_cast<double>(i); }
  double end() const { return node(size() - 1); }
  double value_at(double x) const;
  double mass() const;
};

/// Exact integral of t^k p(t) over [lo, hi] for the piecewise-linear density p.
double integrate_power(const DensityGrid& density, int k, double lo, double hi);

/// A finite positive Borel measure on the real line: finitely many atoms plus
/// an optional piecewise-linear density. Immutable once built.
class Measure {
 public:
  /// The zero measure.
  Measure();
  explicit Measure(std::vector<Atom> atoms, std::optional<DensityGrid> density = std::nullopt);

  static Measure dirac(double location, double mass = 1.0);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<DensityGrid>& density() const { return density_; }
  double total_mass() const { return total_mass_; }
  double atom_mass() const;

  bool is_zero() const { return atoms_.empty() && !density_; }
  bool is_probability(double tol = 1e-9) const;

  /// Smallest interval containing the support (atoms and nonzero density nodes).
  std::pair<double, double> support_hull() const;

  /// Mass of (-inf, x].
  double cdf(double x) const;
  /// Mass of {t : |t| >= eps}.
  double tail_mass(double eps) const;

  Measure scaled(double factor) const;
  Measure normalized() const;

  /// Multiplies the measure by a nonnegative weight: atoms exactly, density
  /// node-wise.
  Measure reweighted(const std::function<double(double)>& weight) const;

  /// ∫ f dm: exact over atoms, Gauss–Legendre on each density segment.
  double integrate(const std::function<double(double)>& f) const;

  /// Density part's Cauchy evaluator, or nullptr when there is no density.
  const detail::CauchyEvaluator* density_cauchy() const { return cauchy_.get(); }

 private:
  std::vector<Atom> atoms_;
  std::optional<DensityGrid> density_;
  double total_mass_ = 0.0;
  std::shared_ptr<const detail::CauchyEvaluator> cauchy_;
};

/// t ↦ a·t + b with a > 0. Pushing μ by the map gives dμ₂(t) = dμ(a·t + b).
struct AffineMap {
  double a = 1.0;
  double b = 0.0;
};

/// The measure dμ₂(t) = dμ(a·t + b): atoms move to (x − b)/a, density is
/// rescaled so mass is preserved.
Measure push_affine(const Measure& m, const AffineMap& map);

/// ∫ t^k dm(t) for k <= 12.
double moment(const Measure& m, int k);

double mean(const Measure& m);
double variance(const Measure& m);

/// Lévy metric between two probability measures.
double levy_distance(const Measure& m1, const Measure& m2);

/// ∫ |p1 − p2| dx over the density parts only (atoms ignored), exact for the
/// piecewise-linear interpolants.
double density_l1_distance(const Measure& m1, const Measure& m2);

}  // namespace cfree
