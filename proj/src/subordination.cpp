#include "cfree/subordination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace cfree {

namespace {

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double max_abs(const std::vector<cplx>& a) {
  double m = 0.0;
  for (const cplx w : a) m = std::max(m, std::abs(w));
  return m;
}

}  // namespace

Subordinator::Subordinator(std::vector<Class> classes, double tol, int max_iter)
    : classes_(std::move(classes)), tol_(tol), max_iter_(max_iter) {
  require(!classes_.empty(), "subordination needs at least one summand");
  for (const auto& c : classes_) require(c.multiplicity >= 1.0, "class multiplicity must be >= 1");
}

Subordinator::Eval Subordinator::evaluate(const std::vector<cplx>& omega) const {
  Eval e;
  e.h.resize(omega.size());
  e.dh.resize(omega.size());
  for (std::size_t c = 0; c < omega.size(); ++c) {
    const auto [f, df] = classes_[c].F(omega[c]);
    e.h[c] = f - omega[c];
    e.dh[c] = df - 1.0;
  }
  return e;
}

std::vector<cplx> Subordinator::map(cplx z, const Eval& e) const {
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < classes_.size(); ++i) sum += classes_[i].multiplicity * e.h[i];
  std::vector<cplx> out(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) out[c] = z + sum - e.h[c];
  return out;
}

bool Subordinator::newton(cplx z, std::vector<cplx>& omega, int& iterations) const {
  const auto k = static_cast<Eigen::Index>(classes_.size());
  const double step_tol = tol_ * (1.0 + std::abs(z));
  double last_moved = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    ++iterations;
    const Eval e = evaluate(omega);
    const auto t = map(z, e);
    Eigen::VectorXcd r(k);
    Eigen::MatrixXcd jac(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      r[c] = omega[c] - t[c];
      for (Eigen::Index i = 0; i < k; ++i) jac(c, i) = -classes_[i].multiplicity * e.dh[i];
      jac(c, c) += 1.0 + e.dh[c];
    }
    Eigen::VectorXcd step = jac.partialPivLu().solve(r);
    if (!step.allFinite()) return false;
    std::vector<cplx> next(omega.size());
    bool inside = false;
    for (int k_half = 0; k_half < 40 && !inside; ++k_half) {
      inside = true;
      for (Eigen::Index c = 0; c < k; ++c) {
        next[c] = omega[c] - step[c];
        if (next[c].imag() <= 0.0) inside = false;
      }
      if (!inside) step *= 0.5;
    }
    if (!inside) return false;
    const double moved = max_abs_diff(next, omega);
    omega = std::move(next);
    const double scale = 1.0 + max_abs(omega);
    // Near a pole of some h the evaluation noise floors the step: a small step
    // that has stopped shrinking counts as converged.
    const bool stalled = moved <= 1e-7 * scale && moved > 0.5 * last_moved;
    last_moved = moved;
    if (moved <= step_tol * scale || stalled) {
      const double floor = z.imag() * (1.0 - 1e-9);
      return std::all_of(omega.begin(), omega.end(), [&](cplx w) { return w.imag() >= floor; });
    }
    if (moved > 1e8 * (1.0 + std::abs(z) + max_abs(omega))) return false;
  }
  return false;
}

bool Subordinator::fixed_point(cplx z, std::vector<cplx>& omega, int& iterations) const {
  const double step_tol = tol_ * (1.0 + std::abs(z));
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter_; ++it) {
    ++iterations;
    auto next = map(z, evaluate(omega));
    const double moved = max_abs_diff(next, omega);
    if (moved > previous)  // ringing: average with the last iterate
      for (std::size_t c = 0; c < next.size(); ++c) next[c] = 0.5 * (next[c] + omega[c]);
    previous = moved;
    omega = std::move(next);
    if (moved <= step_tol * (1.0 + max_abs(omega))) return true;
  }
  return false;
}

Subordinator::Solution Subordinator::finish(cplx z, std::vector<cplx> omega, int iterations) const {
  Solution s;
  const Eval e = evaluate(omega);
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i < classes_.size(); ++i) sum += classes_[i].multiplicity * e.h[i];
  const cplx target = z + sum;
  for (std::size_t c = 0; c < omega.size(); ++c)
    s.residual = std::max(s.residual, std::abs(omega[c] + e.h[c] - target));
  s.F = omega[0] + e.h[0];
  s.omega = std::move(omega);
  s.iterations = iterations;
  return s;
}

std::vector<cplx> Subordinator::tangent(const std::vector<cplx>& omega) const {
  // dω/dz from the implicit equation ω − T(ω, z) = 0, with ∂T/∂z = 1.
  const auto k = static_cast<Eigen::Index>(classes_.size());
  const Eval e = evaluate(omega);
  Eigen::MatrixXcd jac(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index i = 0; i < k; ++i) jac(c, i) = -classes_[i].multiplicity * e.dh[i];
    jac(c, c) += 1.0 + e.dh[c];
  }
  const Eigen::VectorXcd d = jac.partialPivLu().solve(Eigen::VectorXcd::Ones(k));
  std::vector<cplx> out(omega.size());
  for (Eigen::Index c = 0; c < k; ++c) out[c] = d.allFinite() ? d[c] : cplx{1.0, 0.0};
  return out;
}

Subordinator::Solution Subordinator::solve(cplx z, const std::vector<cplx>* warm) const {
  require(z.imag() > 0.0, "subordination needs Im z > 0");
  int iterations = 0;
  if (warm && warm->size() == classes_.size()) {
    std::vector<cplx> omega = *warm;
    if (newton(z, omega, iterations)) return finish(z, std::move(omega), iterations);
  }
  auto fail = [&]() {
    return NumericError(fmt::format("subordination did not converge at z = {}{:+}i", z.real(), z.imag()));
  };
  // Continuation in height: at large Im the map is a strong contraction.
  double height = std::max(z.imag(), 1.0 + std::abs(z));
  std::vector<cplx> omega(classes_.size(), cplx{z.real(), height});
  {
    const cplx zs{z.real(), height};
    std::vector<cplx> start = omega;
    if (!newton(zs, omega, iterations)) {
      omega = std::move(start);
      if (!fixed_point(zs, omega, iterations) || !newton(zs, omega, iterations)) throw fail();
    }
  }
  // Steps down in height with a tangent predictor; a failed step is retried
  // with a smaller drop, and the drop grows back after successes.
  double ratio = 0.25;
  while (height > z.imag()) {
    const double next = std::max(ratio * height, z.imag());
    const cplx zs{z.real(), next};
    const auto d = tangent(omega);
    std::vector<cplx> trial = omega;
    bool inside = true;
    for (std::size_t c = 0; c < trial.size(); ++c) {
      trial[c] += d[c] * cplx{0.0, next - height};
      inside = inside && trial[c].imag() > 0.0;
    }
    if (!inside) trial = omega;
    if (newton(zs, trial, iterations)) {
      omega = std::move(trial);
      height = next;
      ratio = std::max(0.25, ratio * ratio);
      continue;
    }
    if (ratio < 0.99) {
      ratio = std::sqrt(ratio);
      continue;
    }
    trial = omega;
    if (!fixed_point(zs, trial, iterations) || !newton(zs, trial, iterations)) throw fail();
    omega = std::move(trial);
    height = next;
  }
  return finish(z, std::move(omega), iterations);
}

SubordinationPair free_subordination(const Measure& n1, const Measure& n2, cplx z) {
  const Subordinator sub({{f_analytic(n1), 1.0}, {f_analytic(n2), 1.0}});
  const auto s = sub.solve(z);
  return {s.omega[0], s.omega[1], s.F, s.residual, s.iterations};
}

}  // namespace cfree
