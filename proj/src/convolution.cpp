#include "cfree/convolution.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cfree/transforms.hpp"

namespace cfree {

namespace {

void require_probability(const Measure& m, const char* what) {
  require(m.is_probability(1e-6), fmt::format("{} must be a probability measure (mass {:.9g})",
                                              what, m.total_mass()));
}

// Masses of d over the dual cells of the grid start + j·h, j < n.
Eigen::VectorXd cell_masses(const DensityGrid& d, double start, double h, Eigen::Index n,
                            double shift = 0.0) {
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = start + h * static_cast<double>(j) - shift;
    out[j] = integrate_power(d, 0, x - 0.5 * h, x + 0.5 * h);
  }
  return out;
}

struct Group {
  const Measure* m;
  const Measure* nu = nullptr;
  double count = 1.0;
};

std::vector<Group> group_identical(std::span<const Measure> ms) {
  std::vector<Group> groups;
  for (const auto& m : ms) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return same_measure(*g.m, m); });
    if (it != groups.end())
      it->count += 1.0;
    else
      groups.push_back({&m});
  }
  return groups;
}

// Window from additive mean and variance, clipped to the norm bound.
std::pair<double, double> heuristic_window(double mean_sum, double var_sum, double r_max,
                                           std::pair<double, double> bound) {
  const double half = 3.0 * std::sqrt(std::max(var_sum, 0.0)) + 2.0 * r_max;
  double lo = std::max(mean_sum - half, bound.first);
  double hi = std::min(mean_sum + half, bound.second);
  if (hi <= lo) {
    lo = bound.first;
    hi = bound.second;
  }
  const double margin = std::max(0.02 * (hi - lo), 1e-3);
  return {lo - margin, hi + margin};
}

double spread(const Measure& m, double center) {
  const auto [lo, hi] = m.support_hull();
  return std::max(std::abs(lo - center), std::abs(hi - center));
}

cplx e_of(const AnalyticFn& f, cplx w) { return w - f(w).first; }

}  // namespace

namespace detail {

std::pair<double, double> sum_window(std::span<const std::pair<double, double>> hulls,
                                     bool include_zero) {
  double lo = 0.0;
  double hi = 0.0;
  for (auto [a, b] : hulls) {
    lo += include_zero ? std::min(a, 0.0) : a;
    hi += include_zero ? std::max(b, 0.0) : b;
  }
  return {lo, hi};
}

}  // namespace detail

bool same_measure(const Measure& a, const Measure& b) {
  if (&a == &b) return true;
  if (a.atoms().size() != b.atoms().size() || a.density().has_value() != b.density().has_value())
    return false;
  for (std::size_t i = 0; i < a.atoms().size(); ++i)
    if (a.atoms()[i].location != b.atoms()[i].location || a.atoms()[i].mass != b.atoms()[i].mass)
      return false;
  if (!a.density()) return true;
  const auto& da = *a.density();
  const auto& db = *b.density();
  return da.start == db.start && da.step == db.step && da.values.size() == db.values.size() &&
         da.values == db.values;
}

CFreePair make_pair(Measure mu, Measure nu) {
  require_probability(mu, "first component");
  require_probability(nu, "second component");
  return {std::move(mu), std::move(nu), {}, {}};
}

cplx pair_G_mu(const CFreePair& p, cplx z) { return p.g_mu ? p.g_mu(z) : cauchy_G(p.mu, z); }
cplx pair_G_nu(const CFreePair& p, cplx z) { return p.g_nu ? p.g_nu(z) : cauchy_G(p.nu, z); }

Measure classical_conv(const Measure& m1, const Measure& m2, const ConvolutionSettings& s) {
  require_probability(m1, "classical convolution operand");
  require_probability(m2, "classical convolution operand");
  std::vector<Atom> atoms;
  for (const auto& a : m1.atoms())
    for (const auto& b : m2.atoms())
      if (const double p = a.mass * b.mass; p > 0.0) atoms.push_back({a.location + b.location, p});

  const auto& d1 = m1.density();
  const auto& d2 = m2.density();
  if (!d1 && !d2) return Measure(std::move(atoms)).normalized();

  // Range and step of the continuous part.
  double h = std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto cover = [&](double a, double b) {
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  };
  if (d1) h = std::min(h, d1->step);
  if (d2) h = std::min(h, d2->step);
  if (d1)
    for (const auto& b : m2.atoms()) cover(d1->start + b.location, d1->end() + b.location);
  if (d2)
    for (const auto& a : m1.atoms()) cover(d2->start + a.location, d2->end() + a.location);
  if (d1 && d2) cover(d1->start + d2->start, d1->end() + d2->end());
  const auto cap = static_cast<double>(s.max_grid);
  if ((hi - lo) / h + 3.0 > cap) h = (hi - lo) / (cap - 3.0);
  lo -= h;
  hi += h;
  const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / h)) + 1;

  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  if (d1)
    for (const auto& b : m2.atoms()) mass += b.mass * cell_masses(*d1, lo, h, n, b.location);
  if (d2)
    for (const auto& a : m1.atoms()) mass += a.mass * cell_masses(*d2, lo, h, n, a.location);
  if (d1 && d2) {
    // Resample both onto step h, convolve the cell masses, then move the
    // result onto the output grid.
    const auto n1 = static_cast<Eigen::Index>(std::ceil((d1->end() - d1->start) / h)) + 2;
    const auto n2 = static_cast<Eigen::Index>(std::ceil((d2->end() - d2->start) / h)) + 2;
    const Eigen::VectorXd c1 = cell_masses(*d1, d1->start, h, n1);
    const Eigen::VectorXd c2 = cell_masses(*d2, d2->start, h, n2);
    Eigen::VectorXd conv = Eigen::VectorXd::Zero(n1 + n2 + 1);
    for (Eigen::Index i = 0; i < n1; ++i)
      if (c1[i] != 0.0) conv.segment(i + 1, n2) += c1[i] * c2;
    DensityGrid prod;
    prod.start = d1->start + d2->start - h;
    prod.step = h;
    prod.values = conv / h;
    mass += cell_masses(prod, lo, h, n);
  }
  DensityGrid grid;
  grid.start = lo;
  grid.step = h;
  grid.values = mass.cwiseMax(0.0) / h;
  grid.values[0] = 0.0;
  grid.values[n - 1] = 0.0;
  return Measure(std::move(atoms), std::move(grid)).normalized();
}

Measure classical_power(const Measure& m, int k, const ConvolutionSettings& s) {
  require(k >= 0, "convolution power must be nonnegative");
  require_probability(m, "classical convolution operand");
  Measure result = Measure::dirac(0.0);
  Measure base = m;
  while (k > 0) {
    if (k & 1) result = classical_conv(result, base, s);
    k >>= 1;
    if (k > 0) base = classical_conv(base, base, s);
  }
  return result;
}

Measure boolean_conv_many(std::span<const Measure> ms, double shift, const ConvolutionSettings& s) {
  for (const auto& m : ms) require_probability(m, "boolean convolution operand");
  const auto groups = group_identical(ms);
  std::vector<AnalyticFn> fs;
  std::vector<std::pair<double, double>> hulls;
  double mean_sum = shift;
  double var_sum = 0.0;
  double r_max = 0.0;
  for (const auto& g : groups) {
    fs.push_back(f_analytic(*g.m));
    for (int i = 0; i < static_cast<int>(g.count); ++i) hulls.push_back(g.m->support_hull());
    mean_sum += g.count * mean(*g.m);
    var_sum += g.count * variance(*g.m);
    r_max = std::max(r_max, spread(*g.m, mean(*g.m)));
  }
  hulls.push_back({shift, shift});
  const auto [lo, hi] =
      heuristic_window(mean_sum, var_sum, r_max, detail::sum_window(hulls, true));
  auto G = [&](cplx z) {
    cplx e = shift;
    for (std::size_t i = 0; i < groups.size(); ++i) e += groups[i].count * e_of(fs[i], z);
    return 1.0 / (z - e);
  };
  return stieltjes_invert_auto(G, lo, hi, s.inversion);
}

Measure boolean_conv(const Measure& m1, const Measure& m2, const ConvolutionSettings& s) {
  const Measure ms[] = {m1, m2};
  return boolean_conv_many(ms, 0.0, s);
}

Measure free_conv_many(std::span<const Measure> ms, double shift, const ConvolutionSettings& s) {
  for (const auto& m : ms) require_probability(m, "free convolution operand");
  auto groups = group_identical(ms);
  // Point masses only translate.
  double total_shift = shift;
  std::erase_if(groups, [&](const Group& g) {
    if (g.m->density() || g.m->atoms().size() != 1) return false;
    total_shift += g.count * g.m->atoms()[0].location;
    return true;
  });
  if (groups.empty()) return Measure::dirac(total_shift);
  if (groups.size() == 1 && groups[0].count == 1.0)
    return push_affine(*groups[0].m, {1.0, -total_shift});

  std::vector<Subordinator::Class> classes;
  std::vector<std::pair<double, double>> hulls;
  double mean_sum = total_shift;
  double var_sum = 0.0;
  double r_max = 0.0;
  for (const auto& g : groups) {
    classes.push_back({f_analytic(*g.m), g.count});
    const auto hull = g.m->support_hull();
    hulls.push_back({g.count * hull.first, g.count * hull.second});
    mean_sum += g.count * mean(*g.m);
    var_sum += g.count * variance(*g.m);
    r_max = std::max(r_max, spread(*g.m, mean(*g.m)));
  }
  hulls.push_back({total_shift, total_shift});
  const auto [lo, hi] =
      heuristic_window(mean_sum, var_sum, r_max, detail::sum_window(hulls, false));
  const Subordinator sub(std::move(classes));
  std::vector<cplx> warm;
  auto G = [&](cplx z) {
    const auto sol = sub.solve(z - total_shift, warm.empty() ? nullptr : &warm);
    warm = sol.omega;
    return 1.0 / sol.F;
  };
  return stieltjes_invert_auto(G, lo, hi, s.inversion);
}

Measure free_conv(const Measure& n1, const Measure& n2, const ConvolutionSettings& s) {
  const Measure ms[] = {n1, n2};
  return free_conv_many(ms, 0.0, s);
}

CFreePair cfree_conv_many(std::span<const CFreePair> ps, double shift_mu, double shift_nu,
                          const ConvolutionSettings& s) {
  for (const auto& p : ps) {
    require_probability(p.mu, "first component");
    require_probability(p.nu, "second component");
  }
  std::vector<Measure> nus;
  for (const auto& p : ps) nus.push_back(p.nu);
  Measure nu = free_conv_many(nus, shift_nu, s);

  // Classes are distinct pairs; the shift pair (δ_a, δ_b) is one more class.
  struct PairClass {
    const CFreePair* p;
    double count;
  };
  std::vector<PairClass> groups;
  for (const auto& p : ps) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const PairClass& g) {
      return same_measure(g.p->mu, p.mu) && same_measure(g.p->nu, p.nu);
    });
    if (it != groups.end())
      it->count += 1.0;
    else
      groups.push_back({&p, 1.0});
  }

  // Transform-level description shared by the gridded inversion (measures) and
  // the exact closures (carried transforms when present).
  struct Level {
    std::vector<Subordinator::Class> nu_classes;
    std::vector<AnalyticFn> mu_f;
    std::vector<double> counts;
  };
  auto build = [&](bool exact) {
    auto lvl = std::make_shared<Level>();
    for (const auto& g : groups) {
      const CFreePair& p = *g.p;
      AnalyticFn fnu = exact && p.g_nu ? f_analytic(p.g_nu) : f_analytic(p.nu);
      AnalyticFn fmu = exact && p.g_mu ? f_analytic(p.g_mu) : f_analytic(p.mu);
      lvl->nu_classes.push_back({std::move(fnu), g.count});
      lvl->mu_f.push_back(std::move(fmu));
      lvl->counts.push_back(g.count);
    }
    if (shift_mu != 0.0 || shift_nu != 0.0) {
      lvl->nu_classes.push_back({f_analytic(Measure::dirac(shift_nu)), 1.0});
      lvl->mu_f.push_back(f_analytic(Measure::dirac(shift_mu)));
      lvl->counts.push_back(1.0);
    }
    return lvl;
  };
  auto f_mu_at = [](const Level& lvl, const Subordinator& sub, cplx z,
                    const std::vector<cplx>* warm, std::vector<cplx>* out) {
    const auto sol = sub.solve(z, warm);
    cplx e{0.0, 0.0};
    for (std::size_t c = 0; c < lvl.mu_f.size(); ++c)
      e += lvl.counts[c] * e_of(lvl.mu_f[c], sol.omega[c]);
    if (out) *out = sol.omega;
    return std::pair{z - e, sol.F};
  };

  const auto grid_level = build(false);
  const Subordinator grid_sub(grid_level->nu_classes);

  std::vector<std::pair<double, double>> hulls;
  double mean_sum = shift_mu;
  double var_sum = 0.0;
  double r_max = 0.0;
  for (const auto& g : groups) {
    const auto hm = g.p->mu.support_hull();
    const auto hn = g.p->nu.support_hull();
    const std::pair<double, double> hull{std::min(hm.first, hn.first),
                                         std::max(hm.second, hn.second)};
    hulls.push_back({g.count * std::min(hull.first, 0.0), g.count * std::max(hull.second, 0.0)});
    mean_sum += g.count * mean(g.p->mu);
    var_sum += g.count * variance(g.p->mu);
    const double c = mean(g.p->mu);
    r_max = std::max({r_max, spread(g.p->mu, c), spread(g.p->nu, c)});
  }
  hulls.push_back({shift_mu, shift_mu});
  hulls.push_back({shift_nu, shift_nu});
  const auto [lo, hi] =
      heuristic_window(mean_sum, var_sum, r_max, detail::sum_window(hulls, true));
  std::vector<cplx> warm;
  auto G = [&](cplx z) {
    const auto [f, unused] = f_mu_at(*grid_level, grid_sub, z, warm.empty() ? nullptr : &warm, &warm);
    (void)unused;
    return 1.0 / f;
  };
  CFreePair out;
  out.mu = stieltjes_invert_auto(G, lo, hi, s.inversion);
  out.nu = std::move(nu);

  const auto exact_level = build(true);
  auto exact_sub = std::make_shared<const Subordinator>(exact_level->nu_classes);
  out.g_mu = [exact_level, exact_sub, f_mu_at](cplx z) {
    return 1.0 / f_mu_at(*exact_level, *exact_sub, z, nullptr, nullptr).first;
  };
  out.g_nu = [exact_sub](cplx z) { return 1.0 / exact_sub->solve(z).F; };
  return out;
}

CFreePair cfree_conv(const CFreePair& p1, const CFreePair& p2, const ConvolutionSettings& s) {
  const CFreePair ps[] = {p1, p2};
  return cfree_conv_many(ps, 0.0, 0.0, s);
}

}  // namespace cfree
