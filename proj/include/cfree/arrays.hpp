#pragma once

#include <span>
#include <string>
#include <vector>

#include "cfree/convolution.hpp"
#include "cfree/infdiv.hpp"
#include "cfree/nevanlinna.hpp"

namespace cfree {

/// One row of a triangular array: μ_{n1}, …, μ_{nk_n} and the shift c_n.
struct ArrayRow {
  std::vector<Measure> measures;
  double shift = 0.0;
};

struct Centered {
  double a = 0.0;
  Measure measure;  // dμ°(t) = dμ(t + a)
};

/// a = ∫_{|t|<1} t dμ(t), strict inequality; the centered measure is μ moved by −a.
Centered center(const Measure& m);

/// ∫ tz/(z − t) dμ°(t) = z(zG(z) − 1).
cplx f_nk(const Measure& centered, cplx z);

struct RowParams {
  double gamma_n = 0.0;
  Measure sigma_n;
  double L_bound = 0.0;
};

/// σ_n = Σ_k t²/(1 + t²) dμ°_k and γ_n = c_n + Σ_k [a_k + ∫ t/(1 + t²) dμ°_k].
RowParams row_params(const ArrayRow& row);

/// max_k μ_{nk}({|t| ≥ eps}) for each row.
std::vector<double> infinitesimality_check(std::span<const ArrayRow> rows, double eps);

enum class RowMode { Classical, Boolean, Free };

/// δ_{c_n} ∗ μ_{n1} ∗ ⋯ for the chosen convolution.
Measure row_convolve(const ArrayRow& row, RowMode mode, const ConvolutionSettings& s = {});
/// (δ_{c_n}, δ_{c′_n}) ⊞c (μ_{n1}, ν_{n1}) ⊞c ⋯
CFreePair row_convolve_cfree(const ArrayRow& row_mu, const ArrayRow& row_nu,
                             const ConvolutionSettings& s = {});

/// Sum of finite measures; densities on different grids are resampled onto a
/// common one.
Measure sum_measures(std::span<const Measure> ms);

/// Array families used by the limit experiments.
///   gaussian (α, β):   rows of bernoulli_sym(α/√n) and bernoulli_sym(β/√n)
///   poisson (λ, λ′):   rows of (1 − λ/n)δ_0 + (λ/n)δ_1 and the same with λ′
///   degenerate ():     rows of δ_0
struct ArrayScenario {
  std::string family = "gaussian";
  std::vector<int> n_ladder = {16, 64, 256};
  std::vector<double> params;
  double shift_mu = 0.0;
  double shift_nu = 0.0;
};

/// Rows of the first (component 0) or second (component 1) array.
std::vector<ArrayRow> scenario_rows(const ArrayScenario& sc, int component);
/// Generators the scenario converges to.
CFreeGeneratorPair scenario_generators(const ArrayScenario& sc);

struct HarnessSettings {
  ConvolutionSettings conv;
  double levy_tol = 0.05;
  double closing_tol = 1e-2;
  /// Allowed increase of a Lévy distance between consecutive n.
  double monotone_slack = 1e-4;
  int closing_points = 20;
  int fit_points = 40;
};

struct RouteReport {
  std::string name;
  std::vector<double> levy;  // distance to the generator law, per n
  std::vector<Measure> laws;
  bool monotone = true;
  bool passed = false;
};

struct HarnessReport {
  std::vector<int> n;
  /// cfree (first and second component), boolean, free, classical.
  std::vector<RouteReport> routes;
  std::vector<RowParams> params_mu;
  std::vector<RowParams> params_nu;
  /// Limits of the row parameters: γ extrapolated in 1/n, σ fitted to the extrapolated
  /// Nevanlinna transform.
  CFreeGeneratorPair extrapolated;
  /// Largest Lévy distance between consecutive ν-row laws.
  double nu_cauchy_gap = 0.0;
  /// max |Φ_limit − E_{ν_⊎^{γ,σ}}| over the closing points.
  double closing_residual = 0.0;
  TruncatedCone cone;
  /// Φ and F_ν⁻¹ − z of the c-free row pairs, extrapolated in 1/n.
  PhiSamples limit_samples;
  InfdivCheck infdiv;
  CFreePair last_pair;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  const RouteReport& route(const std::string& name) const;
};

/// Runs every route on rows indexed by the ladder n, compares against the
/// laws generated by the row-parameter limits, and checks Φ_limit = E_{ν_⊎^{γ,σ}}.
/// Throws PreconditionError when the ν rows fail the Cauchy criterion.
HarnessReport array_harness(std::span<const int> n_ladder, std::span<const ArrayRow> rows_mu,
                            std::span<const ArrayRow> rows_nu, const HarnessSettings& s = {});
HarnessReport array_harness(const ArrayScenario& sc, const HarnessSettings& s = {});

}  // namespace cfree
