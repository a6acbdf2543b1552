#pragma once

#include <functional>
#include <utility>

#include "cfree/measure.hpp"
#include "cfree/stieltjes.hpp"

namespace cfree {

/// {x + iy : |x| < alpha·y, y > beta}.
struct TruncatedCone {
  double alpha = 1.0;
  double beta = 1.0;

  bool contains(cplx z) const { return z.imag() > beta && std::abs(z.real()) < alpha * z.imag(); }
};

/// z ↦ (value, derivative) of an analytic function on the upper half-plane.
using AnalyticFn = std::function<std::pair<cplx, cplx>(cplx)>;

cplx cauchy_G(const Measure& m, cplx z);
/// (G(z), G'(z)).
std::pair<cplx, cplx> cauchy_G_derivative(const Measure& m, cplx z);
cplx f_transform(const Measure& m, cplx z);
cplx e_transform(const Measure& m, cplx z);

/// F_m with its derivative −G'/G².
AnalyticFn f_analytic(const Measure& m);
/// F = 1/G for a transform known only by value; the derivative is a central
/// difference, which is enough for Newton steps.
AnalyticFn f_analytic(CauchyFn G);

struct NewtonSettings {
  double tol = 1e-12;
  int max_iter = 100;
};

/// Solves f(z) = w for z in the upper half-plane by Newton's method started at
/// z0, falling back to continuation along w + i·t for t shrinking to 0.
/// Throws NumericError when no solution within tol·(1 + |w|) is found.
cplx solve_analytic(const AnalyticFn& f, cplx w, cplx z0, const NewtonSettings& settings = {});

struct TransformContext {
  Measure measure;
  TruncatedCone cone;
  double newton_tol = 1e-12;
  int max_iter = 100;
};

/// Smallest beta in 1, 2, 4, …, 1024 such that F_m is inverted from 64 probe
/// points of the cone (8 heights × 8 slopes) with the required residual.
TruncatedCone validate_cone(const Measure& m, double alpha = 1.0, double newton_tol = 1e-12);

TransformContext make_context(const Measure& m, double alpha = 1.0, double newton_tol = 1e-12);

/// The branch of F⁻¹ that is close to the identity high in the cone.
cplx invert_F(const TransformContext& ctx, cplx w);

/// E_mu(F_nu⁻¹(z)).
cplx phi_transform(const Measure& mu, const TransformContext& nu, cplx z);

/// `count` points of the cone spread over heights [beta·1.05, beta·top_ratio]
/// and slopes in (−alpha, alpha); deterministic.
std::vector<cplx> cone_points(const TruncatedCone& cone, int count, double top_ratio = 8.0);

}  // namespace cfree
