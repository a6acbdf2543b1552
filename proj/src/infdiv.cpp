#include "cfree/infdiv.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cfree/subordination.hpp"

namespace cfree {

namespace {

struct GeneratorStats {
  double mean = 0.0;
  double sd = 0.0;
  double radius = 0.0;  // max |t| over the support of σ
};

// Mean and variance read off E(z) = mean + (∫(1 + t²) dσ)/z + O(z⁻²); they
// are the same for the boolean and free laws.
GeneratorStats stats(const LevyHincinParams& p) {
  GeneratorStats s;
  s.mean = p.gamma + p.sigma.integrate([](double t) { return t; });
  s.sd = std::sqrt(p.sigma.integrate([](double t) { return 1.0 + t * t; }));
  if (!p.sigma.is_zero()) {
    const auto [lo, hi] = p.sigma.support_hull();
    s.radius = std::max(std::abs(lo), std::abs(hi));
  }
  return s;
}

std::pair<double, double> window_around(double center, double half) {
  half = std::max(half, 0.5);
  return {center - half, center + half};
}

// F_ν for the free law: ω = z − E(ω), the single-class subordination with
// h = −E taken twice.
Subordinator free_id_solver(const LevyHincinParams& p) {
  AnalyticFn f = [p](cplx w) {
    const auto [e, de] = nevanlinna_E_derivative(p, w);
    return std::pair{w - e, 1.0 - de};
  };
  return Subordinator({{std::move(f), 2.0}});
}

LevyHincinParams scaled(const LevyHincinParams& p, double t) {
  return {t * p.gamma, p.sigma.scaled(t)};
}

// Poisson(λ) jumps of size x as an atomic measure.
Measure compound_poisson(double lambda, double x) {
  std::vector<Atom> atoms;
  double log_p = -lambda;
  double cumulative = 0.0;
  for (int k = 0; k < 100000; ++k) {
    if (k > 0) log_p += std::log(lambda) - std::log(static_cast<double>(k));
    const double p = std::exp(log_p);
    if (p > 0.0) atoms.push_back({k * x, p});
    cumulative += p;
    if (k > lambda && 1.0 - cumulative < 1e-14) break;
  }
  return Measure(std::move(atoms)).normalized();
}

// (e^{iux} − 1 − iux/(1 + x²))(1 + x²)/x², with the series near x = 0.
cplx levy_kernel(double u, double x) {
  const cplx i{0.0, 1.0};
  if (std::abs(u * x) < 1e-4) {
    const double ux = u * x;
    return (1.0 + x * x) * (i * u * x / (1.0 + x * x) - 0.5 * u * u - i * ux * u * u * x / 6.0 +
                            ux * ux * u * u / 24.0);
  }
  const double x2 = x * x;
  return (std::exp(i * (u * x)) - 1.0 - i * u * x / (1.0 + x2)) * (1.0 + x2) / x2;
}


}  // namespace

namespace detail {

double extrapolate_to_zero(std::span<const double> x, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) w *= x[j] / (x[j] - x[i]);
    acc += w * v[i];
  }
  return acc;
}

cplx extrapolate_to_zero(std::span<const double> x, std::span<const cplx> v) {
  std::vector<double> re, im;
  for (const cplx c : v) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  return {extrapolate_to_zero(x, re), extrapolate_to_zero(x, im)};
}

}  // namespace detail

Measure boolean_id_law(const LevyHincinParams& p, const InfdivSettings& s) {
  validate(p);
  if (p.sigma.is_zero()) return Measure::dirac(p.gamma);
  const auto st = stats(p);
  const auto [lo, hi] = window_around(st.mean, 4.0 * st.sd + 2.0 * st.radius);
  return stieltjes_invert_auto([&](cplx z) { return 1.0 / (z - nevanlinna_E(p, z)); }, lo, hi,
                               s.conv.inversion);
}

cplx free_id_F(const LevyHincinParams& p, cplx z) {
  validate(p);
  return free_id_solver(p).solve(z).omega[0];
}

AnalyticFn free_id_F_fn(const LevyHincinParams& p) {
  validate(p);
  auto sub = std::make_shared<const Subordinator>(free_id_solver(p));
  return [sub, p](cplx z) {
    const cplx w = sub->solve(z).omega[0];
    // ω = z − E(ω)  ⇒  ω′ = 1/(1 + E′(ω))
    return std::pair{w, 1.0 / (1.0 + nevanlinna_E_derivative(p, w).second)};
  };
}

Measure free_id_law(const LevyHincinParams& p, const InfdivSettings& s) {
  validate(p);
  if (p.sigma.is_zero()) return Measure::dirac(p.gamma);
  const auto st = stats(p);
  const auto [lo, hi] = window_around(st.mean, 3.0 * st.sd + 2.0 * st.radius);
  const Subordinator sub = free_id_solver(p);
  std::vector<cplx> warm;
  auto G = [&](cplx z) {
    const auto sol = sub.solve(z, warm.empty() ? nullptr : &warm);
    warm = sol.omega;
    return 1.0 / sol.omega[0];
  };
  return stieltjes_invert_auto(G, lo, hi, s.conv.inversion);
}

Measure classical_id_law(const LevyHincinParams& p, const InfdivSettings& s) {
  validate(p);
  double gauss_var = 0.0;
  double drift = p.gamma;
  Measure atomic = Measure::dirac(0.0);
  for (const auto& a : p.sigma.atoms()) {
    if (std::abs(a.location) < 1e-12) {
      gauss_var += a.mass;
      continue;
    }
    const double x = a.location;
    atomic = classical_conv(atomic, compound_poisson(a.mass * (1.0 + x * x) / (x * x), x), s.conv);
    drift -= a.mass / x;
  }
  const auto& dens = p.sigma.density();
  if (gauss_var == 0.0 && !dens) return push_affine(atomic, {1.0, -drift});

  // Continuous part: Gaussian, density-driven jumps and the drift.
  double jump_mean = 0.0;
  double jump_var = 0.0;
  bool infinite_activity = gauss_var > 0.0;
  double activity = 0.0;
  if (dens) {
    const Measure sd({}, *dens);
    jump_var = sd.total_mass() + sd.integrate([](double x) { return x * x; });
    if (dens->value_at(0.0) > 0.0 || (dens->start < 0.0 && dens->end() > 0.0 &&
                                      (dens->value_at(-dens->step) > 0.0 ||
                                       dens->value_at(dens->step) > 0.0))) {
      infinite_activity = true;
    } else {
      activity = sd.integrate([](double x) { return (1.0 + x * x) / (x * x); });
      jump_mean = sd.integrate([](double x) { return (1.0 + x * x) / x; });
    }
  }
  const double mean = drift + jump_mean;
  const double sd = std::sqrt(gauss_var + jump_var);
  double radius = 0.0;
  if (dens) radius = std::max(std::abs(dens->start), std::abs(dens->end()));
  const double half = 8.0 * sd + 4.0 * radius;
  const double lo = mean - half;
  const double hi = mean + half;
  const auto n = static_cast<Eigen::Index>(s.conv.inversion.grid_n);
  const double h = (hi - lo) / static_cast<double>(n - 1);

  // Exponent on a frequency grid wide enough to avoid wrap-around.
  const double du = 2.0 * kPi / (2.0 * (hi - lo));
  const double u_max = kPi / h;
  const auto nu = static_cast<Eigen::Index>(std::ceil(u_max / du)) + 1;
  const double atom0 = infinite_activity ? 0.0 : std::exp(-activity);
  Eigen::VectorXcd phi(nu);
  for (Eigen::Index k = 0; k < nu; ++k) {
    const double u = du * static_cast<double>(k);
    cplx psi = cplx{0.0, drift * u} - 0.5 * gauss_var * u * u;
    if (dens) {
      cplx acc{0.0, 0.0};
      for (Eigen::Index j = 0; j < dens->size(); ++j) {
        const double w = (j == 0 || j == dens->size() - 1) ? 0.5 : 1.0;
        if (dens->values[j] != 0.0) acc += w * dens->values[j] * levy_kernel(u, dens->node(j));
      }
      psi += acc * dens->step;
    }
    phi[k] = std::exp(psi) - atom0 * std::exp(cplx{0.0, drift * u});
  }
  DensityGrid grid;
  grid.start = lo;
  grid.step = h;
  grid.values.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = grid.node(j);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < nu; ++k) {
      const double w = (k == 0 || k == nu - 1) ? 0.5 : 1.0;
      const double u = du * static_cast<double>(k);
      acc += w * (phi[k] * std::exp(cplx{0.0, -u * x})).real();
    }
    grid.values[j] = std::max(0.0, acc * du / kPi);
  }
  grid.values[0] = 0.0;
  grid.values[n - 1] = 0.0;
  const double cont_mass = grid.mass();
  const double total = cont_mass + atom0;
  if (std::abs(total - 1.0) > s.conv.inversion.mass_tolerance)
    throw NumericError(fmt::format(
        "Fourier inversion recovered mass {:.6g}; the characteristic function aliases", total));
  std::vector<Atom> atoms;
  if (atom0 > 0.0) atoms.push_back({drift, atom0});
  const Measure continuous = Measure(std::move(atoms), std::move(grid)).normalized();
  return classical_conv(continuous, atomic, s.conv);
}

CFreePair cfree_limit_law(const CFreeGeneratorPair& g, const InfdivSettings& s) {
  validate(g.first);
  validate(g.second);
  CFreePair out;
  out.nu = free_id_law(g.second, s);
  const auto fnu = free_id_F_fn(g.second);
  out.g_nu = [fnu](cplx z) { return 1.0 / fnu(z).first; };
  const LevyHincinParams first = g.first;
  out.g_mu = [fnu, first](cplx z) { return 1.0 / (z - nevanlinna_E(first, fnu(z).first)); };
  if (g.first.sigma.is_zero()) {
    // E ≡ γ: F_μ(z) = z − γ.
    out.mu = Measure::dirac(g.first.gamma);
    return out;
  }
  const auto st = stats(g.first);
  const auto st2 = stats(g.second);
  const auto [lo, hi] =
      window_around(st.mean, 3.0 * (st.sd + st2.sd) + 2.0 * (st.radius + st2.radius));
  const Subordinator sub = free_id_solver(g.second);
  std::vector<cplx> warm;
  auto G = [&](cplx z) {
    const auto sol = sub.solve(z, warm.empty() ? nullptr : &warm);
    warm = sol.omega;
    return 1.0 / (z - nevanlinna_E(first, sol.omega[0]));
  };
  out.mu = stieltjes_invert_auto(G, lo, hi, s.conv.inversion);
  return out;
}

CFreePair semigroup_at(const CFreeGeneratorPair& g, double t, const InfdivSettings& s) {
  require(t >= 0.0 && std::isfinite(t), "semigroup time must be nonnegative");
  if (t == 0.0) return make_pair(Measure::dirac(0.0), Measure::dirac(0.0));
  return cfree_limit_law({scaled(g.first, t), scaled(g.second, t)}, s);
}

PhiSamples sample_phi(const CFreePair& pair, int count) {
  const auto cone = validate_cone(pair.nu);
  return sample_phi(pair, cone, cone_points(cone, count));
}

PhiSamples sample_phi(const CFreePair& pair, const TruncatedCone& cone, std::span<const cplx> zs) {
  PhiSamples out;
  out.cone = cone;
  const AnalyticFn fnu = pair.g_nu ? f_analytic(pair.g_nu) : f_analytic(pair.nu);
  for (const cplx z : zs) {
    const cplx w = solve_analytic(fnu, z, z);
    out.z.push_back(z);
    out.phi.push_back(w - 1.0 / pair_G_mu(pair, w));
    out.r_nu.push_back(w - z);
  }
  return out;
}

InfdivCheck check_infdiv(const PhiSamples& samples, double tol) {
  InfdivCheck out;
  out.cone = samples.cone;
  out.tolerance = tol;
  out.first = fit_nevanlinna(samples.z, samples.phi);
  out.second = fit_nevanlinna(samples.z, samples.r_nu);
  return out;
}

InfdivCheck check_infdiv(const CFreePair& pair, double tol) {
  return check_infdiv(sample_phi(pair), tol);
}

ExtractedGenerators extract_generators(const CFreePair& pair, std::span<const double> t_ladder,
                                       const InfdivSettings& s) {
  static constexpr double kDefaultLadder[] = {0.1, 0.05, 0.025};
  if (t_ladder.empty()) t_ladder = kDefaultLadder;
  require(t_ladder.size() >= 2, "t ladder needs at least two entries");
  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    require(t_ladder[i] > 0.0, "t ladder entries must be positive");
    if (i > 0) require(t_ladder[i] < t_ladder[i - 1], "t ladder must be decreasing");
  }
  const auto samples = sample_phi(pair);
  const auto check = check_infdiv(samples);
  if (!check.accepted())
    throw PreconditionError(fmt::format(
        "pair is not infinitely divisible at tolerance (fit residuals {:.3g}, {:.3g})",
        check.first.residual, check.second.residual));
  const CFreeGeneratorPair fitted = check.generators();

  const auto& zs = samples.z;
  const std::size_t nz = zs.size();
  // γ_t + ∫ (1 + xz)/(z − x) · x²/(1 + x²) dμ_t(x)/t equals z(z G_{μ_t}(z) − 1)/t,
  // so the small-time limits are read from the carried transforms.
  std::vector<std::vector<cplx>> psi1(nz), psi2(nz);
  for (double t : t_ladder) {
    const CFreePair pt = semigroup_at(fitted, t, s);
    for (std::size_t i = 0; i < nz; ++i) {
      const cplx z = zs[i];
      psi1[i].push_back(z * (z * pair_G_mu(pt, z) - 1.0) / t);
      psi2[i].push_back(z * (z * pair_G_nu(pt, z) - 1.0) / t);
    }
  }

  ExtractedGenerators out;
  auto component = [&](const std::vector<std::vector<cplx>>& psi) {
    std::vector<cplx> lim(nz);
    for (std::size_t i = 0; i < nz; ++i) {
      const std::span<const cplx> v = psi[i];
      lim[i] = detail::extrapolate_to_zero(t_ladder, v);
      const cplx head = detail::extrapolate_to_zero(t_ladder.first(t_ladder.size() - 1), v.first(v.size() - 1));
      out.residual = std::max(out.residual, std::abs(lim[i] - head) / (1.0 + std::abs(lim[i])));
    }
    const auto fit = fit_nevanlinna(zs, lim);
    out.residual = std::max(out.residual, fit.residual);
    return fit.params;
  };
  out.generators.first = component(psi1);
  out.generators.second = component(psi2);
  return out;
}

}  // namespace cfree
