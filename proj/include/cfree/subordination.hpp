#pragma once

#include <vector>

#include "cfree/transforms.hpp"

namespace cfree {

/// Evaluation of the subordination functions of ν₁ ⊞ ν₂ at one point z.
struct SubordinationPair {
  cplx omega1;
  cplx omega2;
  /// F_{ν₁ ⊞ ν₂}(z) = F_{ν₁}(ω₁) = F_{ν₂}(ω₂).
  cplx F;
  /// |F_{ν₁}(ω₁) − F_{ν₂}(ω₂)|.
  double residual = 0.0;
  int iterations = 0;
};

SubordinationPair free_subordination(const Measure& n1, const Measure& n2, cplx z);

/// Subordination for a free sum with several summand classes, class c taken
/// m_c times. The ω_c solve
///   ω_c = z + Σ_{i≠c} m_i h_i(ω_i) + (m_c − 1) h_c(ω_c),   h_i(w) = F_i(w) − w,
/// whose right side maps the upper half-plane into {Im ≥ Im z}; the fixed point
/// in the upper half-plane is unique, so any converged root there is it.
class Subordinator {
 public:
  struct Class {
    AnalyticFn F;
    double multiplicity = 1.0;
  };

  struct Solution {
    std::vector<cplx> omega;
    cplx F;
    double residual = 0.0;
    int iterations = 0;
  };

  explicit Subordinator(std::vector<Class> classes, double tol = 1e-12, int max_iter = 10000);

  /// Newton from `warm` when given; otherwise (or if that fails) continuation
  /// down from a height where the fixed-point map contracts fast.
  Solution solve(cplx z, const std::vector<cplx>* warm = nullptr) const;

  std::size_t size() const { return classes_.size(); }

 private:
  struct Eval {
    std::vector<cplx> h;
    std::vector<cplx> dh;
  };
  Eval evaluate(const std::vector<cplx>& omega) const;
  std::vector<cplx> map(cplx z, const Eval& e) const;
  bool newton(cplx z, std::vector<cplx>& omega, int& iterations) const;
  bool fixed_point(cplx z, std::vector<cplx>& omega, int& iterations) const;
  std::vector<cplx> tangent(const std::vector<cplx>& omega) const;
  Solution finish(cplx z, std::vector<cplx> omega, int iterations) const;

  std::vector<Class> classes_;
  double tol_;
  int max_iter_;
};

}  // namespace cfree
