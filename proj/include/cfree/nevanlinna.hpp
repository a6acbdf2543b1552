#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cfree/measure.hpp"

namespace cfree {

/// Drift γ and finite positive measure σ of a Nevanlinna representation.
struct LevyHincinParams {
  double gamma = 0.0;
  Measure sigma;
};

/// Checks σ is a finite positive measure and γ finite.
void validate(const LevyHincinParams& p);

/// γ + ∫ (1 + tz)/(z − t) dσ(t). The density part uses
/// ∫ (1 + tz)/(z − t) dσ = (1 + z²) G_σ(z) − z σ(ℝ), exact for the
/// piecewise-linear density.
cplx nevanlinna_E(const LevyHincinParams& p, cplx z);
/// (E(z), E'(z)).
std::pair<cplx, cplx> nevanlinna_E_derivative(const LevyHincinParams& p, cplx z);

/// Nonnegative least squares min ‖Ax − b‖ subject to x ≥ 0 (Lawson–Hanson).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 500);

struct NevanlinnaFit {
  LevyHincinParams params;
  /// max |fit − data| / max |data| over the samples.
  double residual = 0.0;
  /// Half-width of the atom grid that gave the best fit.
  double window = 0.0;
};

/// Fits γ + Σ s_j (1 + t_j z)/(z − t_j), s_j ≥ 0, with 41 atoms t_j equally
/// spaced on [−W, W], to samples of a function on the upper half-plane. W runs
/// over 1, 2, 4, 5, 10, 20 (so the atom spacing divides 1) and the best fit wins.
NevanlinnaFit fit_nevanlinna(std::span<const cplx> z, std::span<const cplx> values);

}  // namespace cfree
