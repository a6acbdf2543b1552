#include "cfree/cauchy.hpp"

#include <algorithm>
#include <cmath>

namespace cfree::detail {

namespace {

// log(1 + w) without cancellation for small |w|.
cplx log1p_complex(cplx w) {
  if (std::abs(w) < 0.25) {
    const double re = 0.5 * std::log1p(2.0 * w.real() + std::norm(w));
    const double im = std::atan2(w.imag(), 1.0 + w.real());
    return {re, im};
  }
  return std::log(1.0 + w);
}

}  // namespace

CauchyEvaluator::CauchyEvaluator(const DensityGrid& density) : density_(density) {
  const Eigen::Index segments = density_.size() - 1;
  if (segments > 0) build(0, segments);
}

int CauchyEvaluator::build(Eigen::Index first, Eigen::Index last) {
  const int index = static_cast<int>(panels_.size());
  panels_.emplace_back();
  Panel panel;
  panel.first = first;
  panel.last = last;
  const double lo = density_.node(first);
  const double hi = density_.node(last);
  panel.center = 0.5 * (lo + hi);
  panel.radius = 0.5 * (hi - lo);
  for (Eigen::Index i = first; i < last; ++i) {
    const double p0 = density_.values[i];
    const double p1 = density_.values[i + 1];
    if (p0 == 0.0 && p1 == 0.0) continue;
    panel.empty = false;
    // p(c + r s) = alpha + beta s on [s0, s1], scaled by dt = r ds
    const double s0 = (density_.node(i) - panel.center) / panel.radius;
    const double s1 = (density_.node(i + 1) - panel.center) / panel.radius;
    const double beta = (p1 - p0) / (s1 - s0);
    const double alpha = p0 - beta * s0;
    double pow0 = s0;
    double pow1 = s1;
    for (int k = 0; k < kTerms; ++k) {
      const double a_term = (pow1 - pow0) / (k + 1);
      const double b_term = (pow1 * s1 - pow0 * s0) / (k + 2);
      panel.moments[k] += panel.radius * (alpha * a_term + beta * b_term);
      pow0 *= s0;
      pow1 *= s1;
    }
  }
  if (!panel.empty && last - first > kLeafSize) {
    const Eigen::Index mid = first + (last - first) / 2;
    panel.left = build(first, mid);
    panel.right = build(mid, last);
  }
  panels_[static_cast<std::size_t>(index)] = panel;
  return index;
}

template <bool WithDerivative>
std::pair<cplx, cplx> CauchyEvaluator::evaluate(cplx z) const {
  cplx g{0.0, 0.0};
  cplx dg{0.0, 0.0};
  if (panels_.empty()) return {g, dg};
  const double h = density_.step;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Panel& panel = panels_[static_cast<std::size_t>(stack[--top])];
    if (panel.empty) continue;
    const cplx zc = z - panel.center;
    if (std::abs(zc) > 3.0 * panel.radius) {
      const cplx u = panel.radius / zc;
      // enough terms for |u|^terms below 1e-17
      const int terms = std::min(kTerms, static_cast<int>(std::ceil(-39.2 / std::log(std::abs(u)))));
      cplx sum{0.0, 0.0};
      cplx dsum{0.0, 0.0};
      for (int k = terms - 1; k >= 0; --k) {
        sum = sum * u + panel.moments[k];
        if constexpr (WithDerivative) dsum = dsum * u + static_cast<double>(k + 1) * panel.moments[k];
      }
      g += sum / zc;
      if constexpr (WithDerivative) dg -= dsum / (zc * zc);
      continue;
    }
    if (panel.left >= 0) {
      stack[top++] = panel.left;
      stack[top++] = panel.right;
      continue;
    }
    for (Eigen::Index i = panel.first; i < panel.last; ++i) {
      const double p0 = density_.values[i];
      const double p1 = density_.values[i + 1];
      if (p0 == 0.0 && p1 == 0.0) continue;
      const double t0 = density_.node(i);
      const double t1 = density_.node(i + 1);
      const double tm = 0.5 * (t0 + t1);
      const double pm = 0.5 * (p0 + p1);
      const double slope = (p1 - p0) / h;
      const cplx z1 = z - t1;
      const cplx lambda = log1p_complex(h / z1);  // ∫ dt/(z − t)
      const cplx zm = z - tm;
      g += pm * lambda + slope * (zm * lambda - h);
      if constexpr (WithDerivative) {
        const cplx d = h / (z1 * (z - t0));  // ∫ dt/(z − t)²
        dg -= pm * d + slope * (zm * d - lambda);
      }
    }
  }
  return {g, dg};
}

cplx CauchyEvaluator::value(cplx z) const { return evaluate<false>(z).first; }

std::pair<cplx, cplx> CauchyEvaluator::value_and_derivative(cplx z) const {
  return evaluate<true>(z);
}

}  // namespace cfree::detail
