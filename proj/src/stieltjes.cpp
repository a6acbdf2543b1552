#include "cfree/stieltjes.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

namespace cfree {

namespace {

using Gauss4 = boost::math::quadrature::gauss<double, 4>;

struct RawInversion {
  std::vector<Atom> atoms;
  DensityGrid density;
  double total = 0.0;
  double edge_level = 0.0;  // largest density value next to an end node
  double max_level = 0.0;
};

std::vector<double> ladder_for(const InversionSettings& s, double h) {
  if (s.y_ladder.empty()) return {h, 0.5 * h, 0.25 * h};
  for (std::size_t i = 0; i < s.y_ladder.size(); ++i) {
    require(s.y_ladder[i] > 0.0, "y ladder entries must be positive");
    if (i > 0) require(s.y_ladder[i] < s.y_ladder[i - 1], "y ladder must be strictly decreasing");
  }
  return s.y_ladder;
}

// Lagrange weights for extrapolating values at heights ys to y = 0.
std::vector<double> zero_weights(std::span<const double> ys) {
  std::vector<double> w(ys.size(), 1.0);
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      if (j != i) w[i] *= ys[j] / (ys[j] - ys[i]);
  return w;
}

double atom_signal(const CauchyFn& G, double x, double y) { return -y * G({x, y}).imag(); }

// Locates a peak of y·(−Im G) by Brent at height y, then sharpens it at y/4 and
// y/16 with the pole update x ← x − y·Re(1/G)/Im(1/G), which is exact for an
// isolated atom whatever its mass.
std::optional<Atom> probe_atom(const CauchyFn& G, double x0, double half_width, double y) {
  auto neg = [&](double t) { return -atom_signal(G, t, y); };
  double x = boost::math::tools::brent_find_minima(neg, x0 - half_width, x0 + half_width, 52).first;
  double signal_at[3] = {atom_signal(G, x, y), 0.0, 0.0};
  double height = y;
  for (int stage = 1; stage < 3; ++stage) {
    height *= 0.25;
    for (int it = 0; it < 3; ++it) {
      const cplx u = 1.0 / G({x, height});
      const double dx = height * u.real() / u.imag();
      if (!std::isfinite(dx) || std::abs(dx) > 4.0 * height) return std::nullopt;
      x -= dx;
    }
    signal_at[stage] = atom_signal(G, x, height);
  }
  // A density contributes O(y) to the signal, an atom a constant.
  if (signal_at[2] < 0.5 * signal_at[0]) return std::nullopt;
  const double mass = (4.0 * signal_at[2] - signal_at[1]) / 3.0;
  if (mass <= 0.0) return std::nullopt;
  return Atom{x, mass};
}

RawInversion invert_raw(const CauchyFn& G, double lo, double hi, const InversionSettings& s) {
  require(hi > lo, "inversion window must have positive width");
  require(s.grid_n >= 3, "inversion grid needs at least three nodes");
  const auto n = static_cast<Eigen::Index>(s.grid_n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  const std::vector<double> ys = ladder_for(s, h);
  const double y_min = ys.back();
  auto node = [&](Eigen::Index j) { return lo + h * static_cast<double>(j); };

  RawInversion out;

  // An atom halfway between nodes shows a fifth of its mass at y_min = h/4.
  const double scan_level = 0.2 * s.atom_threshold;
  Eigen::VectorXd signal(n);
  for (Eigen::Index j = 0; j < n; ++j) signal[j] = atom_signal(G, node(j), y_min);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (signal[j] <= scan_level) continue;
    if (j > 0 && signal[j - 1] >= signal[j]) continue;
    if (j + 1 < n && signal[j + 1] > signal[j]) continue;
    auto atom = probe_atom(G, node(j), h, y_min);
    if (!atom) continue;
    const bool duplicate = std::any_of(out.atoms.begin(), out.atoms.end(), [&](const Atom& a) {
      return std::abs(a.location - atom->location) < h;
    });
    if (!duplicate) out.atoms.push_back(*atom);
  }

  const auto atoms = out.atoms;
  auto g_cont = [&](cplx z) {
    cplx g = G(z);
    for (const auto& a : atoms) g -= a.mass / (z - a.location);
    return g;
  };

  // Dual-cell masses at each height.
  Eigen::MatrixXd cells(n, static_cast<Eigen::Index>(ys.size()));
  for (std::size_t l = 0; l < ys.size(); ++l) {
    const double y = ys[l];
    auto f = [&](double x) { return -g_cont({x, y}).imag() / kPi; };
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = std::max(lo, node(j) - 0.5 * h);
      const double b = std::min(hi, node(j) + 0.5 * h);
      cells(j, static_cast<Eigen::Index>(l)) = Gauss4::integrate(f, a, b);
    }
  }
  const auto w = zero_weights(ys);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (std::size_t l = 0; l < ys.size(); ++l) mass += w[l] * cells.col(static_cast<Eigen::Index>(l));

  if (ys.size() >= 3) {
    const std::span<const double> tail(ys.data() + 1, ys.size() - 1);
    const auto w2 = zero_weights(tail);
    Eigen::VectorXd coarse = Eigen::VectorXd::Zero(n);
    for (std::size_t l = 0; l < tail.size(); ++l)
      coarse += w2[l] * cells.col(static_cast<Eigen::Index>(l + 1));
    const double gap = (mass - coarse).cwiseAbs().sum();
    if (gap > 0.1)
      throw NumericError(fmt::format(
          "Stieltjes extrapolation did not converge (L1 gap {:.3g}); window too small or G invalid",
          gap));
  }

  // Tiny negative cells are residue from atom removal or extrapolation noise.
  const double positive = mass.cwiseMax(0.0).sum();
  const double negative = -mass.cwiseMin(0.0).sum();
  if (negative > std::max(0.05 * positive, 1e-3))
    throw NumericError(fmt::format("extrapolated density is negative (mass {:.3g} below zero)",
                                   negative));
  mass = mass.cwiseMax(0.0);
  mass[1] += mass[0];
  mass[n - 2] += mass[n - 1];
  mass[0] = 0.0;
  mass[n - 1] = 0.0;

  out.density.start = lo;
  out.density.step = h;
  out.density.values = mass / h;
  out.max_level = out.density.values.maxCoeff();
  out.edge_level = std::max(out.density.values[1], out.density.values[n - 2]);
  out.total = mass.sum();
  for (const auto& a : out.atoms) out.total += a.mass;
  return out;
}

Measure finalize(RawInversion raw, const InversionSettings& s) {
  if (!(std::abs(1.0 - raw.total) <= s.mass_tolerance))
    throw NumericError(fmt::format(
        "recovered mass {:.6g} differs from 1 by more than {:.3g}; mass lies outside the window",
        raw.total, s.mass_tolerance));
  for (auto& a : raw.atoms) a.mass /= raw.total;
  raw.density.values /= raw.total;
  std::optional<DensityGrid> density;
  if (raw.density.mass() > 1e-6) density = std::move(raw.density);
  return Measure(std::move(raw.atoms), std::move(density)).normalized();
}

}  // namespace

Measure stieltjes_invert(const CauchyFn& G, double lo, double hi, const InversionSettings& s) {
  return finalize(invert_raw(G, lo, hi, s), s);
}

Measure stieltjes_invert_auto(const CauchyFn& G, double lo, double hi,
                              const InversionSettings& s) {
  for (int attempt = 0;; ++attempt) {
    RawInversion raw = invert_raw(G, lo, hi, s);
    const bool short_mass = 1.0 - raw.total > 5e-3;
    const bool open_edge = raw.edge_level > 1e-4 * raw.max_level;
    if ((!short_mass && !open_edge) || attempt == 6) return finalize(std::move(raw), s);
    const double c = 0.5 * (lo + hi);
    const double r = 0.75 * (hi - lo);
    lo = c - r;
    hi = c + r;
  }
}

}  // namespace cfree
