#include "cfree/nevanlinna.hpp"

#include <cmath>
#include <limits>

#include "cfree/cauchy.hpp"

namespace cfree {

void validate(const LevyHincinParams& p) {
  require(std::isfinite(p.gamma), "gamma must be finite");
  require(std::isfinite(p.sigma.total_mass()), "sigma must be a finite measure");
}

std::pair<cplx, cplx> nevanlinna_E_derivative(const LevyHincinParams& p, cplx z) {
  require(z.imag() > 0.0, "Nevanlinna transform needs Im z > 0");
  cplx e = p.gamma;
  cplx de{0.0, 0.0};
  for (const auto& a : p.sigma.atoms()) {
    const cplx d = z - a.location;
    e += a.mass * (1.0 + a.location * z) / d;
    de -= a.mass * (1.0 + a.location * a.location) / (d * d);
  }
  if (const auto* c = p.sigma.density_cauchy()) {
    const double m0 = p.sigma.density()->mass();
    const auto [g, dg] = c->value_and_derivative(z);
    e += (1.0 + z * z) * g - z * m0;
    de += 2.0 * z * g + (1.0 + z * z) * dg - m0;
  }
  return {e, de};
}

cplx nevanlinna_E(const LevyHincinParams& p, cplx z) { return nevanlinna_E_derivative(p, z).first; }

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() *
                     static_cast<double>(std::max(A.rows(), n));
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    const Eigen::VectorXd s_sub = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = s_sub[static_cast<Eigen::Index>(k)];
    return s;
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      const Eigen::VectorXd s = solve_passive();
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0)
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
      if (!std::isfinite(alpha)) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
    }
  }
  return x;
}

NevanlinnaFit fit_nevanlinna(std::span<const cplx> z, std::span<const cplx> values) {
  require(z.size() == values.size() && !z.empty(), "fit needs matching, nonempty samples");
  constexpr int kAtoms = 41;
  const auto rows = static_cast<Eigen::Index>(2 * z.size());
  Eigen::VectorXd b(rows);
  double scale = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    b[static_cast<Eigen::Index>(2 * i)] = values[i].real();
    b[static_cast<Eigen::Index>(2 * i + 1)] = values[i].imag();
    scale = std::max(scale, std::abs(values[i]));
  }

  NevanlinnaFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (double window : {1.0, 2.0, 4.0, 5.0, 10.0, 20.0}) {
    Eigen::MatrixXd A(rows, kAtoms + 2);
    std::vector<double> t(kAtoms);
    for (int j = 0; j < kAtoms; ++j) t[static_cast<std::size_t>(j)] = window * (2.0 * j / (kAtoms - 1) - 1.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(2 * i);
      A(r, 0) = 1.0;  // γ⁺
      A(r + 1, 0) = 0.0;
      A(r, 1) = -1.0;  // γ⁻
      A(r + 1, 1) = 0.0;
      for (int j = 0; j < kAtoms; ++j) {
        const double tj = t[static_cast<std::size_t>(j)];
        const cplx k = (1.0 + tj * z[i]) / (z[i] - tj);
        A(r, j + 2) = k.real();
        A(r + 1, j + 2) = k.imag();
      }
    }
    const Eigen::VectorXd norms = A.colwise().norm().transpose();
    const Eigen::MatrixXd As = A * norms.cwiseInverse().asDiagonal();
    const Eigen::VectorXd xs = nnls(As, b);
    const Eigen::VectorXd x = xs.cwiseQuotient(norms);
    const Eigen::VectorXd r = A * x - b;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rows; i += 2) worst = std::max(worst, std::hypot(r[i], r[i + 1]));
    const double residual = worst / std::max(scale, 1e-8);
    if (residual < best.residual) {
      std::vector<Atom> atoms;
      for (int j = 0; j < kAtoms; ++j)
        if (x[j + 2] > 0.0) atoms.push_back({t[static_cast<std::size_t>(j)], x[j + 2]});
      best.params = {x[0] - x[1], Measure(std::move(atoms))};
      best.residual = residual;
      best.window = window;
    }
  }
  return best;
}

}  // namespace cfree
