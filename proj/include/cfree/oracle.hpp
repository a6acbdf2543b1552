#pragma once

#include <vector>

#include "cfree/measure.hpp"

namespace cfree::oracle {

/// Non-crossing partition of {0, …, n − 1}. A block is outer when no other
/// block surrounds it, i.e. no W with min W < min V and max V < max W.
struct NCPartition {
  std::vector<std::vector<int>> blocks;
  std::vector<bool> outer;
};

/// Every non-crossing partition of n points, by brute-force filtering of all
/// set partitions. n ≤ 10.
std::vector<NCPartition> enumerate_nc(int n);

/// Moment lists are indexed by order with m[0] = 1; cumulant lists are
/// indexed by order with κ[0] = 0.
std::vector<double> moments_of(const Measure& m, int order);

/// κ with m_n = Σ_{π ∈ NC(n)} Π_V κ_{|V|}. Order ≤ 8.
std::vector<double> free_cumulants_from_moments(const std::vector<double>& moments);
std::vector<double> moments_from_free_cumulants(const std::vector<double>& cumulants);

/// Two-state cumulants R of (μ, ν): m_n(μ) = Σ_{π ∈ NC(n)} Π_{outer} R_{|V|} Π_{inner} κ_{|V|}(ν).
std::vector<double> cfree_cumulants(const std::vector<double>& mu, const std::vector<double>& nu);

/// Moments of the free convolution through additivity of κ. Order ≤ 8.
std::vector<double> free_moments(const std::vector<double>& m1, const std::vector<double>& m2);

/// Moments of the first component of (μ₁, ν₁) ⊞c (μ₂, ν₂): R and κ add. Order ≤ 6.
std::vector<double> cfree_moments(const std::vector<double>& mu1, const std::vector<double>& nu1,
                                  const std::vector<double>& mu2, const std::vector<double>& nu2);

/// Moments of the classical convolution by the binomial formula.
std::vector<double> classical_moments(const std::vector<double>& m1, const std::vector<double>& m2);

}  // namespace cfree::oracle
