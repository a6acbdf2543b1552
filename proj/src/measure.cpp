#include "cfree/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "cfree/cauchy.hpp"

namespace cfree {

namespace {

constexpr double kAtomMergeDistance = 1e-12;

using Gauss7 = boost::math::quadrature::gauss<double, 7>;

// Keeps at most one zero node on each side of the nonzero part.
std::optional<DensityGrid> trim(DensityGrid d) {
  const Eigen::Index n = d.size();
  Eigen::Index first = 0;
  while (first < n && d.values[first] == 0.0) ++first;
  if (first == n) return std::nullopt;
  Eigen::Index last = n - 1;
  while (d.values[last] == 0.0) --last;
  first = std::max<Eigen::Index>(first - 1, 0);
  last = std::min<Eigen::Index>(last + 1, n - 1);
  if (last - first + 1 < 2) {
    if (last + 1 < n) ++last; else --first;
  }
  if (first == 0 && last == n - 1) return d;
  DensityGrid out;
  out.start = d.node(first);
  out.step = d.step;
  out.values = d.values.segment(first, last - first + 1);
  return out;
}

}  // namespace

double DensityGrid::value_at(double x) const {
  const double tol = 1e-12 * step;
  if (size() < 2 || x < start - tol || x > end() + tol) return 0.0;
  const double u = (x - start) / step;
  auto i = static_cast<Eigen::Index>(std::floor(u));
  i = std::clamp<Eigen::Index>(i, 0, size() - 2);
  const double w = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

double DensityGrid::mass() const {
  if (size() < 2) return 0.0;
  return step * (values.sum() - 0.5 * (values[0] + values[size() - 1]));
}

double integrate_power(const DensityGrid& d, int k, double lo, double hi) {
  if (d.size() < 2 || hi <= lo) return 0.0;
  const double a = std::max(lo, d.start);
  const double b = std::min(hi, d.end());
  if (b <= a) return 0.0;
  auto first = static_cast<Eigen::Index>(std::floor((a - d.start) / d.step));
  auto last = static_cast<Eigen::Index>(std::ceil((b - d.start) / d.step));
  first = std::clamp<Eigen::Index>(first, 0, d.size() - 2);
  last = std::clamp<Eigen::Index>(last, 1, d.size() - 1);
  double total = 0.0;
  for (Eigen::Index i = first; i < last; ++i) {
    const double t0 = d.node(i);
    const double t1 = d.node(i + 1);
    const double u0 = std::max(t0, a);
    const double u1 = std::min(t1, b);
    if (u1 <= u0) continue;
    const double p0 = d.values[i];
    const double slope = (d.values[i + 1] - p0) / d.step;
    if (p0 == 0.0 && slope == 0.0) continue;
    // degree k+1 <= 13: the 7-point rule is exact.
    total += Gauss7::integrate(
        [&](double t) { return (p0 + slope * (t - t0)) * std::pow(t, k); }, u0, u1);
  }
  return total;
}

Measure::Measure() = default;

Measure::Measure(std::vector<Atom> atoms, std::optional<DensityGrid> density) {
  for (const auto& atom : atoms) {
    require(std::isfinite(atom.location) && std::isfinite(atom.mass),
            "atom location and mass must be finite");
    require(atom.mass > 0.0, "atom masses must be strictly positive");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });
  for (const auto& atom : atoms) {
    if (!atoms_.empty() && atom.location - atoms_.back().location <= kAtomMergeDistance) {
      auto& prev = atoms_.back();
      const double m = prev.mass + atom.mass;
      prev.location = (prev.location * prev.mass + atom.location * atom.mass) / m;
      prev.mass = m;
    } else {
      atoms_.push_back(atom);
    }
  }
  if (density) {
    require(density->step > 0.0 && std::isfinite(density->step), "density step must be positive");
    require(density->size() >= 2, "density grid needs at least two nodes");
    require(density->values.allFinite(), "density values must be finite");
    require(density->values.minCoeff() >= 0.0, "density values must be nonnegative");
    density_ = trim(std::move(*density));
  }
  total_mass_ = atom_mass() + (density_ ? density_->mass() : 0.0);
  if (density_) cauchy_ = std::make_shared<detail::CauchyEvaluator>(*density_);
}

Measure Measure::dirac(double location, double mass) { return Measure({{location, mass}}); }

double Measure::atom_mass() const {
  return std::accumulate(atoms_.begin(), atoms_.end(), 0.0,
                         [](double acc, const Atom& a) { return acc + a.mass; });
}

bool Measure::is_probability(double tol) const { return std::abs(total_mass_ - 1.0) <= tol; }

std::pair<double, double> Measure::support_hull() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (!atoms_.empty()) {
    lo = atoms_.front().location;
    hi = atoms_.back().location;
  }
  if (density_) {
    const auto& v = density_->values;
    Eigen::Index first = 0;
    while (first < v.size() && v[first] == 0.0) ++first;
    Eigen::Index last = v.size() - 1;
    while (last > first && v[last] == 0.0) --last;
    // a zero end node still bounds the support of the adjacent segment
    lo = std::min(lo, density_->node(std::max<Eigen::Index>(first - 1, 0)));
    hi = std::max(hi, density_->node(std::min<Eigen::Index>(last + 1, v.size() - 1)));
  }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

double Measure::cdf(double x) const {
  double total = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.location > x) break;
    total += atom.mass;
  }
  if (density_) total += integrate_power(*density_, 0, density_->start, x);
  return total;
}

double Measure::tail_mass(double eps) const {
  double total = 0.0;
  for (const auto& atom : atoms_)
    if (std::abs(atom.location) >= eps) total += atom.mass;
  if (density_) {
    total += integrate_power(*density_, 0, density_->start, -eps);
    total += integrate_power(*density_, 0, eps, density_->end());
  }
  return total;
}

Measure Measure::scaled(double factor) const {
  require(factor >= 0.0, "measure scale factor must be nonnegative");
  if (factor == 0.0) return Measure();
  std::vector<Atom> atoms = atoms_;
  for (auto& atom : atoms) atom.mass *= factor;
  std::optional<DensityGrid> density = density_;
  if (density) density->values *= factor;
  return Measure(std::move(atoms), std::move(density));
}

Measure Measure::normalized() const {
  require(total_mass_ > 0.0, "cannot normalize the zero measure");
  return scaled(1.0 / total_mass_);
}

Measure Measure::reweighted(const std::function<double(double)>& weight) const {
  std::vector<Atom> atoms;
  for (const auto& atom : atoms_) {
    const double m = atom.mass * weight(atom.location);
    if (m > 0.0) atoms.push_back({atom.location, m});
  }
  std::optional<DensityGrid> density = density_;
  if (density) {
    for (Eigen::Index i = 0; i < density->size(); ++i)
      density->values[i] *= std::max(0.0, weight(density->node(i)));
  }
  return Measure(std::move(atoms), std::move(density));
}

double Measure::integrate(const std::function<double(double)>& f) const {
  double total = 0.0;
  for (const auto& atom : atoms_) total += atom.mass * f(atom.location);
  if (density_) {
    const auto& d = *density_;
    for (Eigen::Index i = 0; i + 1 < d.size(); ++i) {
      const double p0 = d.values[i];
      const double p1 = d.values[i + 1];
      if (p0 == 0.0 && p1 == 0.0) continue;
      const double t0 = d.node(i);
      total += Gauss7::integrate(
          [&](double t) { return (p0 + (p1 - p0) * (t - t0) / d.step) * f(t); }, t0,
          d.node(i + 1));
    }
  }
  return total;
}

Measure push_affine(const Measure& m, const AffineMap& map) {
  require(map.a > 0.0 && std::isfinite(map.a) && std::isfinite(map.b),
          "affine map needs a > 0 and finite b");
  std::vector<Atom> atoms = m.atoms();
  for (auto& atom : atoms) atom.location = (atom.location - map.b) / map.a;
  std::optional<DensityGrid> density = m.density();
  if (density) {
    density->start = (density->start - map.b) / map.a;
    density->step /= map.a;
    density->values *= map.a;
  }
  return Measure(std::move(atoms), std::move(density));
}

double moment(const Measure& m, int k) {
  require(k >= 0, "moment order must be nonnegative");
  require(k <= 12, "moment order above 12 is not supported");
  double total = 0.0;
  for (const auto& atom : m.atoms()) total += atom.mass * std::pow(atom.location, k);
  if (const auto& d = m.density()) {
    const double exact = integrate_power(*d, k, d->start, d->end());
    // trapezoid on t^k p(t) measures how well the grid resolves the weight
    double trap = 0.0;
    for (Eigen::Index i = 0; i < d->size(); ++i) {
      const double w = (i == 0 || i == d->size() - 1) ? 0.5 : 1.0;
      trap += w * d->values[i] * std::pow(d->node(i), k);
    }
    trap *= d->step;
    const double scale = integrate_power(*d, 0, d->start, d->end()) *
                         std::pow(std::max(std::abs(d->start), std::abs(d->end())), k);
    if (std::abs(trap - exact) > 1e-3 * std::max(scale, 1e-300))
      throw NumericError("density grid too coarse for moment of order " + std::to_string(k));
    total += exact;
  }
  return total;
}

double mean(const Measure& m) { return moment(m, 1) / m.total_mass(); }

double variance(const Measure& m) {
  const double mu = mean(m);
  return std::max(0.0, moment(m, 2) / m.total_mass() - mu * mu);
}

namespace {

// Right-continuous CDF with O(log n) evaluation.
class CdfTable {
 public:
  explicit CdfTable(const Measure& m) {
    for (const auto& atom : m.atoms()) {
      atom_loc_.push_back(atom.location);
      atom_cum_.push_back((atom_cum_.empty() ? 0.0 : atom_cum_.back()) + atom.mass);
    }
    if (m.density()) {
      grid_ = *m.density();
      cell_cum_.assign(static_cast<std::size_t>(grid_.size()), 0.0);
      for (Eigen::Index i = 1; i < grid_.size(); ++i)
        cell_cum_[i] = cell_cum_[i - 1] + 0.5 * grid_.step * (grid_.values[i - 1] + grid_.values[i]);
      has_density_ = true;
    }
  }

  double operator()(double x) const {
    double total = 0.0;
    auto it = std::upper_bound(atom_loc_.begin(), atom_loc_.end(), x);
    if (it != atom_loc_.begin()) total += atom_cum_[std::distance(atom_loc_.begin(), it) - 1];
    if (has_density_ && x > grid_.start) {
      if (x >= grid_.end()) return total + cell_cum_.back();
      const double u = (x - grid_.start) / grid_.step;
      auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), grid_.size() - 2);
      const double s = x - grid_.node(i);
      const double p0 = grid_.values[i];
      const double slope = (grid_.values[i + 1] - p0) / grid_.step;
      total += cell_cum_[i] + p0 * s + 0.5 * slope * s * s;
    }
    return total;
  }

  void breakpoints(std::vector<double>& out) const {
    out.insert(out.end(), atom_loc_.begin(), atom_loc_.end());
    if (has_density_)
      for (Eigen::Index i = 0; i < grid_.size(); ++i) out.push_back(grid_.node(i));
  }

 private:
  std::vector<double> atom_loc_;
  std::vector<double> atom_cum_;
  DensityGrid grid_;
  std::vector<double> cell_cum_;
  bool has_density_ = false;
};

}  // namespace

double levy_distance(const Measure& m1, const Measure& m2) {
  require(m1.is_probability(1e-6) && m2.is_probability(1e-6),
          "Lévy distance needs probability measures");
  const CdfTable f(m1);
  const CdfTable g(m2);
  std::vector<double> bf;
  std::vector<double> bg;
  f.breakpoints(bf);
  g.breakpoints(bg);

  // Band condition F(x−ε)−ε ≤ G(x) ≤ F(x+ε)+ε on both sides of every breakpoint.
  auto holds = [&](double eps) {
    constexpr double slack = 1e-13;
    auto check_at = [&](double x) {
      return f(x - eps) - eps <= g(x) + slack && g(x) <= f(x + eps) + eps + slack;
    };
    auto check_both_sides = [&](double x) {
      const double delta = 1e-11 * (1.0 + std::abs(x));
      return check_at(x) && check_at(x - delta);
    };
    for (double x : bg)
      if (!check_both_sides(x)) return false;
    for (double x : bf)
      if (!check_both_sides(x + eps) || !check_both_sides(x - eps)) return false;
    return true;
  };

  if (holds(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 52; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

double density_l1_distance(const Measure& m1, const Measure& m2) {
  const auto& d1 = m1.density();
  const auto& d2 = m2.density();
  std::vector<double> points;
  for (const auto* d : {&d1, &d2})
    if (*d)
      for (Eigen::Index i = 0; i < (*d)->size(); ++i) points.push_back((*d)->node(i));
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  auto values = [](const std::optional<DensityGrid>& d, double u, double v) -> std::pair<double, double> {
    if (!d) return {0.0, 0.0};
    const double tol = 1e-9 * d->step;
    if (u < d->start - tol || v > d->end() + tol) return {0.0, 0.0};
    return {d->value_at(u), d->value_at(v)};
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double u = points[k];
    const double v = points[k + 1];
    const auto [a1, b1] = values(d1, u, v);
    const auto [a2, b2] = values(d2, u, v);
    const double e0 = a1 - a2;
    const double e1 = b1 - b2;
    const double w = v - u;
    if (e0 * e1 >= 0.0) {
      total += 0.5 * w * std::abs(e0 + e1);
    } else {
      total += 0.5 * w * (e0 * e0 + e1 * e1) / (std::abs(e0) + std::abs(e1));
    }
  }
  return total;
}

}  // namespace cfree
