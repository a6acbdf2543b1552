#pragma once

#include <span>
#include <vector>

#include "cfree/measure.hpp"
#include "cfree/stieltjes.hpp"
#include "cfree/subordination.hpp"

namespace cfree {

/// Operand of the c-free convolution. When the pair comes out of a
/// transform-level construction the exact Cauchy transforms ride along in
/// g_mu / g_nu; the measures are their gridded inversions.
struct CFreePair {
  Measure mu;
  Measure nu;
  CauchyFn g_mu;
  CauchyFn g_nu;
};

CFreePair make_pair(Measure mu, Measure nu);

/// Cauchy transforms of a pair's components: the exact ones when carried,
/// otherwise those of the measures.
cplx pair_G_mu(const CFreePair& p, cplx z);
cplx pair_G_nu(const CFreePair& p, cplx z);

struct ConvolutionSettings {
  InversionSettings inversion;
  /// Largest density grid produced by classical convolution before coarsening.
  std::size_t max_grid = 16384;
};

Measure classical_conv(const Measure& m1, const Measure& m2, const ConvolutionSettings& s = {});
/// k-fold classical self-convolution by binary powering.
Measure classical_power(const Measure& m, int k, const ConvolutionSettings& s = {});

Measure boolean_conv(const Measure& m1, const Measure& m2, const ConvolutionSettings& s = {});
/// δ_shift ⊎ m_1 ⊎ … ⊎ m_k by summing E-transforms and inverting once.
Measure boolean_conv_many(std::span<const Measure> ms, double shift = 0.0,
                          const ConvolutionSettings& s = {});

Measure free_conv(const Measure& n1, const Measure& n2, const ConvolutionSettings& s = {});
/// δ_shift ⊞ m_1 ⊞ … ⊞ m_k; identical summands share one subordination class.
Measure free_conv_many(std::span<const Measure> ms, double shift = 0.0,
                       const ConvolutionSettings& s = {});

CFreePair cfree_conv(const CFreePair& p1, const CFreePair& p2, const ConvolutionSettings& s = {});
/// (δ_{shift_mu}, δ_{shift_nu}) ⊞c p_1 ⊞c … ⊞c p_k.
CFreePair cfree_conv_many(std::span<const CFreePair> ps, double shift_mu = 0.0,
                          double shift_nu = 0.0, const ConvolutionSettings& s = {});

/// Exact equality of representation (atoms and density samples).
bool same_measure(const Measure& a, const Measure& b);

namespace detail {
/// Window [lo, hi] covering the norm bound of a sum with the given hulls;
/// with `include_zero`, each hull is first widened to contain 0.
std::pair<double, double> sum_window(std::span<const std::pair<double, double>> hulls,
                                     bool include_zero);
}  // namespace detail

}  // namespace cfree
