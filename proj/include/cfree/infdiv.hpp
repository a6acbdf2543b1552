#pragma once

#include <span>
#include <vector>

#include "cfree/convolution.hpp"
#include "cfree/nevanlinna.hpp"
#include "cfree/transforms.hpp"

namespace cfree {

/// (γ, σ) drives the first component through E, (γ′, σ′) the second through
/// F⁻¹(z) − z.
struct CFreeGeneratorPair {
  LevyHincinParams first;
  LevyHincinParams second;
};

struct InfdivSettings {
  ConvolutionSettings conv;
};

/// Law with E-transform nevanlinna_E(p).
Measure boolean_id_law(const LevyHincinParams& p, const InfdivSettings& s = {});

/// F of the law with F⁻¹(w) = w + nevanlinna_E(p)(w): solves w = z − E(w),
/// a self-map of the upper half-plane.
cplx free_id_F(const LevyHincinParams& p, cplx z);
/// Transform-level F of the free law, reusable across many points.
AnalyticFn free_id_F_fn(const LevyHincinParams& p);
Measure free_id_law(const LevyHincinParams& p, const InfdivSettings& s = {});

/// Law with characteristic exponent
///   iγu + ∫ (e^{iux} − 1 − iux/(1 + x²)) (1 + x²)/x² dσ(x),
/// the integrand at x = 0 being −u²/2. Atoms of σ away from 0 become exact
/// compound-Poisson atoms; the Gaussian and density parts are inverted from
/// the characteristic function.
Measure classical_id_law(const LevyHincinParams& p, const InfdivSettings& s = {});

/// (μ, ν) with ν the free law of (γ′, σ′) and F_μ(z) = z − E_{γ,σ}(F_ν(z)).
/// The result carries the exact transforms.
CFreePair cfree_limit_law(const CFreeGeneratorPair& g, const InfdivSettings& s = {});

/// The ⊞c-semigroup through the generators at time t:
/// ν_t = free law of (tγ′, tσ′) and E_{μ_t}(z) = t·E_{γ,σ}(F_{ν_t}(z)).
CFreePair semigroup_at(const CFreeGeneratorPair& g, double t, const InfdivSettings& s = {});

struct InfdivCheck {
  NevanlinnaFit first;   // fit of Φ_{(μ,ν)}
  NevanlinnaFit second;  // fit of F_ν⁻¹(z) − z
  TruncatedCone cone;
  double tolerance = 1e-4;

  bool accepted() const {
    return first.residual <= tolerance && second.residual <= tolerance;
  }
  CFreeGeneratorPair generators() const { return {first.params, second.params}; }
};

/// Samples of Φ_{(μ,ν)} and F_ν⁻¹ − z at `count` points of ν's validated cone.
struct PhiSamples {
  TruncatedCone cone;
  std::vector<cplx> z;
  std::vector<cplx> phi;
  std::vector<cplx> r_nu;  // F_ν⁻¹(z) − z
};
PhiSamples sample_phi(const CFreePair& pair, int count = 40);
/// Samples at given points of a cone on which F_ν⁻¹ is known to exist.
PhiSamples sample_phi(const CFreePair& pair, const TruncatedCone& cone, std::span<const cplx> z);

/// Fits a discrete Nevanlinna representation to Φ and to F_ν⁻¹ − z.
InfdivCheck check_infdiv(const CFreePair& pair, double tol = 1e-4);
InfdivCheck check_infdiv(const PhiSamples& samples, double tol = 1e-4);

struct ExtractedGenerators {
  CFreeGeneratorPair generators;
  /// Largest disagreement between the ladder extrapolations.
  double residual = 0.0;
};

/// Generators of a certified pair through the small-time limits
///   γ = lim (1/t) ∫ x/(1 + x²) dμ_t,  σ = lim (1/t) x²/(1 + x²) dμ_t,
/// and their free analogues for ν_t. The semigroup is built from the fitted
/// representation, and the Nevanlinna transform of (γ_t, (1/t) x²/(1 + x²) dμ_t),
/// which is z(z G_{μ_t}(z) − 1)/t, is extrapolated to t = 0 by the polynomial
/// through the ladder and fitted.
ExtractedGenerators extract_generators(const CFreePair& pair,
                                       std::span<const double> t_ladder = {},
                                       const InfdivSettings& s = {});

namespace detail {
/// Value at 0 of the polynomial through (x_i, v_i).
double extrapolate_to_zero(std::span<const double> x, std::span<const double> v);
cplx extrapolate_to_zero(std::span<const double> x, std::span<const cplx> v);
}  // namespace detail

}  // namespace cfree
