#include "cfree/stable.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "cfree/subordination.hpp"
#include "cfree/transforms.hpp"

namespace cfree {

namespace {

constexpr std::array<std::string_view, 4> kNames = {"constant", "power_high", "power_low", "log"};

// Fixed probe points spread over radii 10⁻²…10² and angles across the half-plane.
std::vector<cplx> probe_points(int count) {
  std::vector<cplx> z;
  for (int k = 0; k < count; ++k) {
    const double u = (k + 0.5) / count;
    const double r = std::pow(10.0, -2.0 + 4.0 * std::fmod(u * 7.0, 1.0));
    const double theta = kPi * (0.02 + 0.96 * u);
    z.push_back(std::polar(r, theta));
  }
  return z;
}

double functional_residual(const std::function<cplx(cplx)>& phi, double a, double b, double c) {
  double worst = 0.0;
  for (const cplx z : probe_points(50)) {
    const cplx v = phi(z);
    const cplx lhs = v + phi(a * z) / a;
    const cplx rhs = phi(b * z) / b + c;
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(v)));
  }
  return worst;
}

bool heavy_tailed(const StableFunction& f) {
  return !(f.family == StableFamily::Constant && f.b.real() == 0.0) &&
         !(f.family == StableFamily::PowerHigh && f.alpha == 2.0 && f.b.imag() == 0.0);
}

}  // namespace

StableFamily parse_stable_family(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<StableFamily>(i);
  throw PreconditionError(fmt::format("unknown stable family '{}'", name));
}

std::string_view stable_family_name(StableFamily f) { return kNames[static_cast<std::size_t>(f)]; }

StableFunction make_stable(StableFamily family, cplx a, cplx b, double alpha) {
  StableFunction f{family, a, b, alpha};
  const double tol = 1e-12;
  switch (family) {
    case StableFamily::Constant:
      require(a.imag() == 0.0 && b.imag() == 0.0, "constant family takes real a and b");
      require(b.real() <= 0.0, "constant family needs b <= 0");
      break;
    case StableFamily::PowerHigh:
    case StableFamily::PowerLow: {
      require(a.imag() == 0.0, "power families take real a");
      require(b != cplx{0.0, 0.0}, "power families need b != 0");
      const bool high = family == StableFamily::PowerHigh;
      if (high)
        require(alpha > 1.0 && alpha <= 2.0, "power_high needs alpha in (1, 2]");
      else
        require(alpha > 0.0 && alpha < 1.0, "power_low needs alpha in (0, 1)");
      // arg taken in (−2π, 0] so that the ranges read as stated.
      double arg = std::arg(b);
      if (arg > tol) arg -= 2.0 * kPi;
      const double lo = high ? (alpha - 2.0) * kPi : -kPi;
      const double hi = high ? 0.0 : (alpha - 1.0) * kPi;
      require(arg >= lo - tol && arg <= hi + tol,
              fmt::format("arg b = {:.6g} outside [{:.6g}, {:.6g}]", arg, lo, hi));
      break;
    }
    case StableFamily::Log:
      require(a.imag() <= 0.0, "log family needs Im a <= 0");
      require(b.imag() == 0.0 && b.real() < 0.0, "log family needs real b < 0");
      break;
  }
  for (const cplx z : probe_points(200)) {
    const cplx v = eval_stable(f, z);
    if (v.imag() > 1e-12 * (1.0 + std::abs(v)))
      throw PreconditionError(
          fmt::format("stable function leaves the lower half-plane at z = {}{:+}i", z.real(), z.imag()));
  }
  return f;
}

std::pair<cplx, cplx> eval_stable_derivative(const StableFunction& f, cplx z) {
  require(z.imag() > 0.0, "stable functions are evaluated on Im z > 0");
  switch (f.family) {
    case StableFamily::Constant:
      return {cplx{f.a.real(), f.b.real()}, cplx{0.0, 0.0}};
    case StableFamily::PowerHigh:
    case StableFamily::PowerLow: {
      const cplx p = std::pow(z, 1.0 - f.alpha);
      return {f.a + f.b * p, f.b * (1.0 - f.alpha) * p / z};
    }
    case StableFamily::Log:
      return {f.a + f.b * std::log(z), f.b / z};
  }
  throw PreconditionError("unknown stable family");
}

cplx eval_stable(const StableFunction& f, cplx z) { return eval_stable_derivative(f, z).first; }

StabilityResult check_stability(const StableFunction& f, double a_test) {
  require(a_test > 0.0 && std::isfinite(a_test), "a_test must be positive");
  const double a = a_test;
  StabilityResult r;
  switch (f.family) {
    case StableFamily::Constant:
      if (f.b.real() != 0.0) {
        r.b = a / (1.0 + a);
        r.c = 0.0;
      } else {
        r.b = 1.0;
        r.c = f.a.real() / a;
      }
      break;
    case StableFamily::PowerHigh:
    case StableFamily::PowerLow:
      r.b = std::pow(1.0 + std::pow(a, -f.alpha), -1.0 / f.alpha);
      r.c = f.a.real() * (1.0 + 1.0 / a - 1.0 / r.b);
      break;
    case StableFamily::Log:
      r.b = a / (1.0 + a);
      r.c = f.b.real() * (std::log(a) / a - std::log(r.b) / r.b);
      break;
  }
  r.residual = functional_residual([&](cplx z) { return eval_stable(f, z); }, a, r.b, r.c);
  return r;
}

StabilityResult check_stability(const std::function<cplx(cplx)>& phi, double a_test) {
  require(a_test > 0.0 && std::isfinite(a_test), "a_test must be positive");
  const auto zs = probe_points(50);
  std::vector<cplx> lhs;
  std::vector<double> w;
  for (const cplx z : zs) {
    const cplx v = phi(z);
    lhs.push_back(v + phi(a_test * z) / a_test);
    w.push_back(1.0 / (1.0 + std::abs(v)));
  }
  // For fixed b the best real c is a weighted mean; b is searched in log scale.
  auto best_c = [&](double b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const double d = (lhs[i] - phi(b * zs[i]) / b).real();
      num += w[i] * w[i] * d;
      den += w[i] * w[i];
    }
    return num / den;
  };
  auto sse = [&](double log_b) {
    const double b = std::exp(log_b);
    const double c = best_c(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) acc += std::norm(w[i] * (lhs[i] - phi(b * zs[i]) / b - c));
    return acc;
  };
  double best_lb = 0.0;
  double best_v = sse(0.0);
  for (double lb = -8.0; lb <= 8.0; lb += 0.25)
    if (const double v = sse(lb); v < best_v) {
      best_v = v;
      best_lb = lb;
    }
  const auto [lb, unused] =
      boost::math::tools::brent_find_minima(sse, best_lb - 0.25, best_lb + 0.25, 52);
  (void)unused;
  StabilityResult r;
  r.b = std::exp(lb);
  r.c = best_c(r.b);
  r.residual = functional_residual(phi, a_test, r.b, r.c);
  return r;
}

CFreePair make_stable_pair(const StableFunction& phi, const StableFunction& psi, const InfdivSettings& s) {
  // Constant real ψ and φ: point masses.
  if (psi.family == StableFamily::Constant && psi.b.real() == 0.0 && phi.family == StableFamily::Constant &&
      phi.b.real() == 0.0) {
    return make_pair(Measure::dirac(phi.a.real()), Measure::dirac(psi.a.real()));
  }
  // ω = z − ψ(ω) solves ω + ψ(ω) = z, i.e. ω = F_ν(z).
  AnalyticFn cls = [psi](cplx w) {
    const auto [v, dv] = eval_stable_derivative(psi, w);
    return std::pair{w - v, 1.0 - dv};
  };
  auto sub = std::make_shared<const Subordinator>(std::vector<Subordinator::Class>{{cls, 2.0}});
  auto f_nu = [sub](cplx z) { return sub->solve(z).omega[0]; };
  for (const cplx z : probe_points(20)) {
    try {
      const cplx w = f_nu(z);
      const cplx back = w + eval_stable(psi, w);
      if (std::abs(back - z) > 1e-8 * (1.0 + std::abs(z)) || w.imag() < z.imag() * (1.0 - 1e-9))
        throw NumericError("inverse does not close");
    } catch (const NumericError&) {
      throw PreconditionError(fmt::format(
          "z + psi(z) is not the inverse of an F-transform near z = {}{:+}i", z.real(), z.imag()));
    }
  }

  CFreePair out;
  out.g_nu = [f_nu](cplx z) { return 1.0 / f_nu(z); };
  out.g_mu = [f_nu, phi](cplx z) { return 1.0 / (z - eval_stable(phi, f_nu(z))); };

  const cplx probe{0.0, 1.0};
  const cplx vphi = eval_stable(phi, probe);
  const cplx vpsi = eval_stable(psi, probe);
  double half = 4.0 * (std::abs(vphi) + std::abs(vpsi)) + 1.0;
  if (heavy_tailed(phi) || heavy_tailed(psi)) half *= 25.0;
  auto invert = [&](const CauchyFn& G, double center) {
    return stieltjes_invert_auto(G, center - half, center + half, s.conv.inversion);
  };
  out.nu = invert(out.g_nu, vpsi.real());
  out.mu = invert(out.g_mu, vphi.real());
  return out;
}

CFreePair push_pair(const CFreePair& p, const AffineMap& map) {
  require(map.a > 0.0, "affine map needs a > 0");
  CFreePair out = make_pair(push_affine(p.mu, map), push_affine(p.nu, map));
  const double a = map.a, b = map.b;
  // G₂(z) = a G(az + b).
  if (p.g_mu) out.g_mu = [g = p.g_mu, a, b](cplx z) { return a * g(a * z + b); };
  if (p.g_nu) out.g_nu = [g = p.g_nu, a, b](cplx z) { return a * g(a * z + b); };
  return out;
}

AffineMap fit_equivalence(const CFreePair& p, const CFreePair& q) {
  const double sp = std::sqrt(variance(p.nu));
  const double sq = std::sqrt(variance(q.nu));
  if (sp == 0.0 || sq == 0.0) return {1.0, mean(q.nu) - mean(p.nu)};
  const double a = sq / sp;
  return {a, mean(q.nu) - a * mean(p.nu)};
}

}  // namespace cfree
