#include "cfree/transforms.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cfree/cauchy.hpp"

namespace cfree {

namespace {

void require_upper(cplx z) {
  require(z.imag() > 0.0 && std::isfinite(z.real()) && std::isfinite(z.imag()),
          fmt::format("transform argument must lie in the upper half-plane, got {}{:+}i", z.real(),
                      z.imag()));
}

bool newton(const AnalyticFn& f, cplx w, cplx& z, const NewtonSettings& s) {
  const double target = s.tol * (1.0 + std::abs(w));
  for (int it = 0; it < s.max_iter; ++it) {
    const auto [fz, dfz] = f(z);
    const cplx r = fz - w;
    if (std::abs(r) <= target) return true;
    if (dfz == 0.0 || !std::isfinite(std::abs(dfz))) return false;
    cplx step = r / dfz;
    // Damp until the iterate stays in the upper half-plane and the residual does
    // not blow up.
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      const cplx next = z - step;
      if (next.imag() > 0.0) {
        const cplx r_next = f(next).first - w;
        if (std::abs(r_next) < 2.0 * std::abs(r) || k == 29) {
          z = next;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) return false;
  }
  return std::abs(f(z).first - w) <= target;
}

}  // namespace

std::pair<cplx, cplx> cauchy_G_derivative(const Measure& m, cplx z) {
  require_upper(z);
  cplx g{0.0, 0.0};
  cplx dg{0.0, 0.0};
  for (const auto& a : m.atoms()) {
    const cplx u = 1.0 / (z - a.location);
    g += a.mass * u;
    dg -= a.mass * u * u;
  }
  if (const auto* c = m.density_cauchy()) {
    const auto [gd, dgd] = c->value_and_derivative(z);
    g += gd;
    dg += dgd;
  }
  return {g, dg};
}

cplx cauchy_G(const Measure& m, cplx z) {
  require_upper(z);
  cplx g{0.0, 0.0};
  for (const auto& a : m.atoms()) g += a.mass / (z - a.location);
  if (const auto* c = m.density_cauchy()) g += c->value(z);
  return g;
}

cplx f_transform(const Measure& m, cplx z) {
  const cplx g = cauchy_G(m, z);
  if (g == 0.0) throw PreconditionError("F-transform of the zero measure is undefined");
  return 1.0 / g;
}

cplx e_transform(const Measure& m, cplx z) { return z - f_transform(m, z); }

AnalyticFn f_analytic(const Measure& m) {
  return [m](cplx z) {
    const auto [g, dg] = cauchy_G_derivative(m, z);
    if (g == 0.0) throw PreconditionError("F-transform of the zero measure is undefined");
    return std::pair{1.0 / g, -dg / (g * g)};
  };
}

AnalyticFn f_analytic(CauchyFn G) {
  return [G = std::move(G)](cplx z) {
    const double d = 1e-5 * (1.0 + std::abs(z));
    const cplx f = 1.0 / G(z);
    const cplx df = (1.0 / G(z + d) - 1.0 / G(z - d)) / (2.0 * d);
    return std::pair{f, df};
  };
}

cplx solve_analytic(const AnalyticFn& f, cplx w, cplx z0, const NewtonSettings& s) {
  require_upper(w);
  cplx z = z0;
  if (z.imag() > 0.0 && newton(f, w, z, s)) return z;
  // Continuation from high above w, where the solution is close to w.
  double t = 2.0 * (1.0 + std::abs(w));
  z = w + cplx{0.0, t};
  while (true) {
    const cplx wt = w + cplx{0.0, t};
    if (!newton(f, wt, z, s))
      throw NumericError(fmt::format("Newton inversion failed at w = {}{:+}i (stalled at t = {:.3g})",
                                     w.real(), w.imag(), t));
    if (t == 0.0) return z;
    t = t > 1e-3 * w.imag() ? 0.5 * t : 0.0;
  }
}

std::vector<cplx> cone_points(const TruncatedCone& cone, int count, double top_ratio) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double lo = 1.05 * cone.beta;
  const double hi = std::max(top_ratio, 1.1) * cone.beta;
  // R2 low-discrepancy sequence
  constexpr double g1 = 0.7548776662466927;
  constexpr double g2 = 0.5698402909980532;
  for (int k = 0; k < count; ++k) {
    const double u = std::fmod(0.5 + g1 * (k + 1), 1.0);
    const double v = std::fmod(0.5 + g2 * (k + 1), 1.0);
    const double y = lo * std::pow(hi / lo, v);
    const double x = 0.95 * cone.alpha * y * (2.0 * u - 1.0);
    pts.emplace_back(x, y);
  }
  return pts;
}

TruncatedCone validate_cone(const Measure& m, double alpha, double newton_tol) {
  require(alpha > 0.0, "cone aperture alpha must be positive");
  require(newton_tol > 0.0 && newton_tol <= 1e-6, "newton tolerance must lie in (0, 1e-6]");
  require(!m.is_zero(), "cannot invert the F-transform of the zero measure");
  const auto f = f_analytic(m);
  const NewtonSettings s{newton_tol, 100};
  for (double beta = 1.0; beta <= 1024.0; beta *= 2.0) {
    const TruncatedCone cone{alpha, beta};
    bool ok = true;
    for (const cplx w : cone_points(cone, 64)) {
      cplx z = w;
      if (!newton(f, w, z, s) || z.imag() > w.imag() * (1.0 + 1e-9) ||
          std::abs(z - w) > 0.5 * std::abs(w)) {
        ok = false;
        break;
      }
    }
    if (ok) return cone;
  }
  throw NumericError("no truncated cone with beta <= 1024 admits a stable F-inverse");
}

TransformContext make_context(const Measure& m, double alpha, double newton_tol) {
  return {m, validate_cone(m, alpha, newton_tol), newton_tol, 100};
}

cplx invert_F(const TransformContext& ctx, cplx w) {
  require(ctx.cone.contains(w),
          fmt::format("point {}{:+}i lies outside the validated cone (alpha {}, beta {})", w.real(),
                      w.imag(), ctx.cone.alpha, ctx.cone.beta));
  const auto f = f_analytic(ctx.measure);
  const cplx z = solve_analytic(f, w, w, {ctx.newton_tol, ctx.max_iter});
  if (z.imag() <= 0.0) throw NumericError("F-inverse left the upper half-plane");
  return z;
}

cplx phi_transform(const Measure& mu, const TransformContext& nu, cplx z) {
  return e_transform(mu, invert_F(nu, z));
}

}  // namespace cfree
