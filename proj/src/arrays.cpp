#include "cfree/arrays.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cfree/families.hpp"
#include "cfree/transforms.hpp"

namespace cfree {

namespace {

bool all_identical(std::span<const Measure> ms) {
  return std::all_of(ms.begin(), ms.end(), [&](const Measure& m) { return same_measure(m, ms[0]); });
}

// Location of a single unit atom, if the measure is one.
std::optional<double> dirac_location(const Measure& m) {
  if (m.density() || m.atoms().size() != 1) return std::nullopt;
  return m.atoms()[0].location;
}

void require_row(const ArrayRow& row) {
  require(!row.measures.empty(), "array row must have at least one measure");
  require(std::isfinite(row.shift), "row shift must be finite");
  for (const auto& m : row.measures) require(m.is_probability(1e-6), "array rows hold probability measures");
}

}  // namespace

Centered center(const Measure& m) {
  require(m.is_probability(1e-6), "center needs a probability measure");
  double a = 0.0;
  for (const auto& at : m.atoms())
    if (std::abs(at.location) < 1.0) a += at.location * at.mass;
  if (const auto& d = m.density()) a += integrate_power(*d, 1, -1.0, 1.0);
  if (a == 0.0) return {0.0, m};
  return {a, push_affine(m, {1.0, a})};
}

cplx f_nk(const Measure& centered, cplx z) {
  require(z.imag() > 0.0, "f_nk needs Im z > 0");
  return z * (z * cauchy_G(centered, z) - 1.0);
}

Measure sum_measures(std::span<const Measure> ms) {
  std::vector<Atom> atoms;
  std::vector<const DensityGrid*> dens;
  for (const auto& m : ms) {
    atoms.insert(atoms.end(), m.atoms().begin(), m.atoms().end());
    if (m.density()) dens.push_back(&*m.density());
  }
  if (dens.empty()) return Measure(std::move(atoms));
  if (dens.size() == 1) return Measure(std::move(atoms), *dens[0]);
  double lo = dens[0]->start, hi = dens[0]->end(), step = dens[0]->step;
  for (const auto* d : dens) {
    lo = std::min(lo, d->start);
    hi = std::max(hi, d->end());
    step = std::min(step, d->step);
  }
  const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / step)) + 1;
  DensityGrid g;
  g.start = lo;
  g.step = (hi - lo) / static_cast<double>(n - 1);
  g.values = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (const auto* d : dens) g.values[j] += d->value_at(g.node(j));
  return Measure(std::move(atoms), std::move(g));
}

RowParams row_params(const ArrayRow& row) {
  require_row(row);
  RowParams out;
  out.gamma_n = row.shift;
  // Identical summands share one centering.
  std::vector<std::pair<const Measure*, double>> groups;
  for (const auto& m : row.measures) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return same_measure(*g.first, m); });
    if (it != groups.end())
      it->second += 1.0;
    else
      groups.push_back({&m, 1.0});
  }
  std::vector<Measure> parts;
  for (const auto& [m, count] : groups) {
    const auto c = center(*m);
    out.gamma_n += count * (c.a + c.measure.integrate([](double t) { return t / (1.0 + t * t); }));
    const Measure w = c.measure.reweighted([](double t) { return t * t / (1.0 + t * t); });
    if (!w.is_zero()) parts.push_back(w.scaled(count));
  }
  out.sigma_n = sum_measures(parts);
  out.L_bound = out.sigma_n.total_mass();
  return out;
}

std::vector<double> infinitesimality_check(std::span<const ArrayRow> rows, double eps) {
  require(eps > 0.0, "eps must be positive");
  std::vector<double> out;
  for (const auto& row : rows) {
    double worst = 0.0;
    for (const auto& m : row.measures) worst = std::max(worst, m.tail_mass(eps));
    out.push_back(worst);
  }
  return out;
}

Measure row_convolve(const ArrayRow& row, RowMode mode, const ConvolutionSettings& s) {
  require_row(row);
  switch (mode) {
    case RowMode::Boolean:
      return boolean_conv_many(row.measures, row.shift, s);
    case RowMode::Free:
      return free_conv_many(row.measures, row.shift, s);
    case RowMode::Classical: {
      Measure acc;
      if (all_identical(row.measures)) {
        acc = classical_power(row.measures[0], static_cast<int>(row.measures.size()), s);
      } else {
        acc = row.measures[0];
        for (std::size_t k = 1; k < row.measures.size(); ++k) acc = classical_conv(acc, row.measures[k], s);
      }
      return row.shift == 0.0 ? acc : push_affine(acc, {1.0, -row.shift});
    }
  }
  throw PreconditionError("unknown row mode");
}

CFreePair row_convolve_cfree(const ArrayRow& row_mu, const ArrayRow& row_nu,
                             const ConvolutionSettings& s) {
  require_row(row_mu);
  require_row(row_nu);
  require(row_mu.measures.size() == row_nu.measures.size(), "c-free rows must have equal length");
  double cm = row_mu.shift, cn = row_nu.shift;
  bool diracs = true;
  for (std::size_t k = 0; k < row_mu.measures.size() && diracs; ++k) {
    const auto a = dirac_location(row_mu.measures[k]);
    const auto b = dirac_location(row_nu.measures[k]);
    diracs = a && b;
    if (diracs) {
      cm += *a;
      cn += *b;
    }
  }
  if (diracs) return make_pair(Measure::dirac(cm), Measure::dirac(cn));
  std::vector<CFreePair> ps;
  for (std::size_t k = 0; k < row_mu.measures.size(); ++k)
    ps.push_back(make_pair(row_mu.measures[k], row_nu.measures[k]));
  return cfree_conv_many(ps, row_mu.shift, row_nu.shift, s);
}

std::vector<ArrayRow> scenario_rows(const ArrayScenario& sc, int component) {
  require(component == 0 || component == 1, "component is 0 or 1");
  require(!sc.n_ladder.empty(), "scenario needs an n ladder");
  const double shift = component == 0 ? sc.shift_mu : sc.shift_nu;
  auto param = [&](double fallback) {
    const auto i = static_cast<std::size_t>(component);
    return i < sc.params.size() ? sc.params[i] : (sc.params.empty() ? fallback : sc.params[0]);
  };
  std::vector<ArrayRow> rows;
  for (int n : sc.n_ladder) {
    require(n >= 1, "row lengths must be positive");
    const double dn = n;
    Measure m;
    if (sc.family == "gaussian") {
      const double scale = param(1.0);
      require(scale >= 0.0, "gaussian scale must be nonnegative");
      m = scale == 0.0 ? Measure::dirac(0.0) : bernoulli_sym(scale / std::sqrt(dn));
    } else if (sc.family == "poisson") {
      const double rate = param(1.0);
      require(rate >= 0.0 && rate <= dn, "poisson rate must lie in [0, n]");
      if (rate == 0.0)
        m = Measure::dirac(0.0);
      else if (rate == dn)
        m = Measure::dirac(1.0);
      else
        m = Measure({{0.0, 1.0 - rate / dn}, {1.0, rate / dn}});
    } else if (sc.family == "degenerate") {
      m = Measure::dirac(0.0);
    } else {
      throw PreconditionError(fmt::format("unknown array family '{}'", sc.family));
    }
    rows.push_back({std::vector<Measure>(static_cast<std::size_t>(n), m), shift});
  }
  return rows;
}

CFreeGeneratorPair scenario_generators(const ArrayScenario& sc) {
  CFreeGeneratorPair g;
  auto param = [&](int component) {
    const auto i = static_cast<std::size_t>(component);
    return i < sc.params.size() ? sc.params[i] : (sc.params.empty() ? 1.0 : sc.params[0]);
  };
  auto one = [&](int c, double shift) -> LevyHincinParams {
    if (sc.family == "gaussian") {
      const double a = param(c);
      return {shift, a == 0.0 ? Measure() : Measure::dirac(0.0, a * a)};
    }
    if (sc.family == "poisson") {
      const double l = param(c);
      return {shift + l / 2.0, l == 0.0 ? Measure() : Measure::dirac(1.0, l / 2.0)};
    }
    if (sc.family == "degenerate") return {shift, Measure()};
    throw PreconditionError(fmt::format("unknown array family '{}'", sc.family));
  };
  g.first = one(0, sc.shift_mu);
  g.second = one(1, sc.shift_nu);
  return g;
}

const RouteReport& HarnessReport::route(const std::string& name) const {
  for (const auto& r : routes)
    if (r.name == name) return r;
  throw PreconditionError(fmt::format("no route named '{}'", name));
}

HarnessReport array_harness(std::span<const int> n_ladder, std::span<const ArrayRow> rows_mu,
                            std::span<const ArrayRow> rows_nu, const HarnessSettings& s) {
  require(n_ladder.size() >= 2, "harness needs at least two rows");
  require(rows_mu.size() == n_ladder.size() && rows_nu.size() == n_ladder.size(),
          "one row per ladder entry");
  for (std::size_t i = 1; i < n_ladder.size(); ++i)
    require(n_ladder[i] > n_ladder[i - 1], "n ladder must increase");
  HarnessReport rep;
  rep.n.assign(n_ladder.begin(), n_ladder.end());
  const std::size_t L = n_ladder.size();
  std::vector<double> inv_n;
  for (int n : n_ladder) inv_n.push_back(1.0 / n);

  // Row c-free convolutions; their second components must converge.
  std::vector<CFreePair> pairs;
  for (std::size_t i = 0; i < L; ++i) pairs.push_back(row_convolve_cfree(rows_mu[i], rows_nu[i], s.conv));
  for (std::size_t i = 1; i < L; ++i)
    rep.nu_cauchy_gap = std::max(rep.nu_cauchy_gap, levy_distance(pairs[i - 1].nu, pairs[i].nu));
  if (levy_distance(pairs[L - 2].nu, pairs[L - 1].nu) > s.levy_tol)
    throw PreconditionError(fmt::format(
        "second-component rows do not converge (consecutive Lévy gap {:.3g})",
        levy_distance(pairs[L - 2].nu, pairs[L - 1].nu)));

  // A common cone for every F_{ν_n}⁻¹.
  rep.cone = {1.0, 1.0};
  for (const auto& p : pairs) rep.cone.beta = std::max(rep.cone.beta, validate_cone(p.nu).beta);
  const auto fit_z = cone_points(rep.cone, s.fit_points);

  // Row parameters (γ_n, σ_n).
  auto route5 = [&](std::span<const ArrayRow> rows, std::vector<RowParams>& params) {
    std::vector<double> gam;
    std::vector<std::vector<cplx>> psi(fit_z.size());
    for (const auto& row : rows) {
      params.push_back(row_params(row));
      const auto& p = params.back();
      gam.push_back(p.gamma_n);
      for (std::size_t j = 0; j < fit_z.size(); ++j)
        psi[j].push_back(nevanlinna_E({p.gamma_n, p.sigma_n}, fit_z[j]));
    }
    std::vector<cplx> lim;
    for (const auto& v : psi) lim.push_back(detail::extrapolate_to_zero(inv_n, v));
    const auto fit = fit_nevanlinna(fit_z, lim);
    return LevyHincinParams{detail::extrapolate_to_zero(inv_n, gam), fit.params.sigma};
  };
  rep.extrapolated.first = route5(rows_mu, rep.params_mu);
  rep.extrapolated.second = route5(rows_nu, rep.params_nu);

  // Generator laws.
  InfdivSettings is{s.conv};
  const CFreePair target = cfree_limit_law(rep.extrapolated, is);
  const Measure target_b = boolean_id_law(rep.extrapolated.first, is);
  const Measure target_f = free_id_law(rep.extrapolated.first, is);
  const Measure target_c = classical_id_law(rep.extrapolated.first, is);

  auto add_route = [&](const std::string& name, const Measure& target_law, auto&& law_at) {
    RouteReport r;
    r.name = name;
    for (std::size_t i = 0; i < L; ++i) {
      r.laws.push_back(law_at(i));
      r.levy.push_back(levy_distance(r.laws.back(), target_law));
      if (i > 0 && r.levy[i] > r.levy[i - 1] + s.monotone_slack) r.monotone = false;
    }
    r.passed = r.monotone && r.levy.back() <= s.levy_tol;
    if (!r.passed)
      rep.failures.push_back(fmt::format("route {}: Lévy distances [{:.3g}] to the generator law{}",
                                         name, fmt::join(r.levy, ", "),
                                         r.monotone ? "" : " do not decrease"));
    rep.routes.push_back(std::move(r));
  };
  add_route("cfree", target.mu, [&](std::size_t i) { return pairs[i].mu; });
  add_route("cfree_nu", target.nu, [&](std::size_t i) { return pairs[i].nu; });
  add_route("boolean", target_b, [&](std::size_t i) { return row_convolve(rows_mu[i], RowMode::Boolean, s.conv); });
  add_route("free", target_f, [&](std::size_t i) { return row_convolve(rows_mu[i], RowMode::Free, s.conv); });
  add_route("classical", target_c,
            [&](std::size_t i) { return row_convolve(rows_mu[i], RowMode::Classical, s.conv); });

  // Φ of the c-free row limit, extrapolated in 1/n.
  const auto closing_z = cone_points(rep.cone, s.closing_points);
  std::vector<cplx> all_z = fit_z;
  all_z.insert(all_z.end(), closing_z.begin(), closing_z.end());
  std::vector<PhiSamples> per_n;
  for (const auto& p : pairs) per_n.push_back(sample_phi(p, rep.cone, all_z));
  PhiSamples lim;
  lim.cone = rep.cone;
  for (std::size_t j = 0; j < all_z.size(); ++j) {
    std::vector<cplx> phi, r;
    for (const auto& ps : per_n) {
      phi.push_back(ps.phi[j]);
      r.push_back(ps.r_nu[j]);
    }
    const cplx phi0 = detail::extrapolate_to_zero(inv_n, phi);
    if (j < fit_z.size()) {
      lim.z.push_back(all_z[j]);
      lim.phi.push_back(phi0);
      lim.r_nu.push_back(detail::extrapolate_to_zero(inv_n, r));
    } else {
      const cplx e = nevanlinna_E(rep.extrapolated.first, all_z[j]);
      rep.closing_residual = std::max(rep.closing_residual, std::abs(phi0 - e));
    }
  }
  if (rep.closing_residual > s.closing_tol)
    rep.failures.push_back(
        fmt::format("closing identity off by {:.3g} on the cone", rep.closing_residual));
  rep.limit_samples = std::move(lim);
  rep.infdiv = check_infdiv(rep.limit_samples);
  if (!rep.infdiv.accepted())
    rep.failures.push_back(fmt::format("limit pair not infinitely divisible (fit residuals {:.3g}, {:.3g})",
                                       rep.infdiv.first.residual, rep.infdiv.second.residual));
  rep.last_pair = pairs.back();
  return rep;
}

HarnessReport array_harness(const ArrayScenario& sc, const HarnessSettings& s) {
  const auto mu = scenario_rows(sc, 0);
  const auto nu = scenario_rows(sc, 1);
  return array_harness(sc.n_ladder, mu, nu, s);
}

}  // namespace cfree
