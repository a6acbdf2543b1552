#include "cfree/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/special_functions/binomial.hpp>
#include <fmt/format.h>

namespace cfree::oracle {

namespace {

constexpr int kFreeOrder = 8;
constexpr int kCFreeOrder = 6;

bool crossing(const std::vector<int>& a, const std::vector<int>& b) {
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(a.size()); ++j)
      for (int x : b)
        for (int y : b) {
          // a_i < x < a_j < y or x < a_i < y < a_j
          if (a[i] < x && x < a[j] && a[j] < y) return true;
          if (x < a[i] && a[i] < y && y < a[j]) return true;
        }
  return false;
}

const std::vector<NCPartition>& nc_cached(int n) {
  static std::map<int, std::vector<NCPartition>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, enumerate_nc(n)).first;
  return it->second;
}

void check_moments(const std::vector<double>& m, int max_order, const char* what) {
  if (m.empty() || std::abs(m[0] - 1.0) > 1e-12)
    throw PreconditionError(fmt::format("{}: moment lists start with m0 = 1", what));
  if (static_cast<int>(m.size()) - 1 > max_order)
    throw PreconditionError(fmt::format("{}: order {} exceeds {}", what, m.size() - 1, max_order));
}

// Σ over NC(n) minus the one-block partition, with block weights from `weight`.
template <class Weight>
double lower_terms(int n, Weight&& weight) {
  double acc = 0.0;
  for (const auto& p : nc_cached(n)) {
    if (p.blocks.size() == 1) continue;
    double prod = 1.0;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) prod *= weight(p, b);
    acc += prod;
  }
  return acc;
}

}  // namespace

std::vector<NCPartition> enumerate_nc(int n) {
  require(n >= 0 && n <= 10, "enumerate_nc supports n <= 10");
  std::vector<NCPartition> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  // Restricted growth strings: a[0] = 0, a[i] ≤ 1 + max(a[0..i−1]).
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  while (true) {
    const int k = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(i)])].push_back(i);
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      for (int j = i + 1; j < k && ok; ++j)
        ok = !crossing(blocks[static_cast<std::size_t>(i)], blocks[static_cast<std::size_t>(j)]);
    if (ok) {
      NCPartition p;
      p.outer.assign(blocks.size(), true);
      for (std::size_t v = 0; v < blocks.size(); ++v)
        for (std::size_t w = 0; w < blocks.size(); ++w)
          if (v != w && blocks[w].front() < blocks[v].front() && blocks[v].back() < blocks[w].back())
            p.outer[v] = false;
      p.blocks = std::move(blocks);
      out.push_back(std::move(p));
    }
    // Next restricted growth string.
    int i = n - 1;
    for (; i > 0; --i) {
      const int prefix_max = *std::max_element(a.begin(), a.begin() + i);
      if (a[static_cast<std::size_t>(i)] <= prefix_max) {
        ++a[static_cast<std::size_t>(i)];
        std::fill(a.begin() + i + 1, a.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

std::vector<double> moments_of(const Measure& m, int order) {
  require(order >= 0 && order <= 12, "moment order must be in [0, 12]");
  std::vector<double> out(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) out[static_cast<std::size_t>(k)] = moment(m, k);
  return out;
}

std::vector<double> free_cumulants_from_moments(const std::vector<double>& moments) {
  check_moments(moments, kFreeOrder, "free cumulants");
  const int N = static_cast<int>(moments.size()) - 1;
  std::vector<double> k(moments.size(), 0.0);
  for (int n = 1; n <= N; ++n) {
    const double rest = lower_terms(n, [&](const NCPartition& p, std::size_t b) { return k[p.blocks[b].size()]; });
    k[static_cast<std::size_t>(n)] = moments[static_cast<std::size_t>(n)] - rest;
  }
  return k;
}

std::vector<double> moments_from_free_cumulants(const std::vector<double>& cumulants) {
  require(!cumulants.empty() && static_cast<int>(cumulants.size()) - 1 <= kFreeOrder,
          "cumulant order exceeds 8");
  std::vector<double> m(cumulants.size(), 0.0);
  m[0] = 1.0;
  for (int n = 1; n < static_cast<int>(cumulants.size()); ++n) {
    double acc = 0.0;
    for (const auto& p : nc_cached(n)) {
      double prod = 1.0;
      for (const auto& b : p.blocks) prod *= cumulants[b.size()];
      acc += prod;
    }
    m[static_cast<std::size_t>(n)] = acc;
  }
  return m;
}

std::vector<double> cfree_cumulants(const std::vector<double>& mu, const std::vector<double>& nu) {
  check_moments(mu, kCFreeOrder, "c-free cumulants");
  check_moments(nu, kCFreeOrder, "c-free cumulants");
  require(mu.size() == nu.size(), "moment lists must have equal order");
  const auto kappa = free_cumulants_from_moments(nu);
  const int N = static_cast<int>(mu.size()) - 1;
  std::vector<double> r(mu.size(), 0.0);
  for (int n = 1; n <= N; ++n) {
    const double rest = lower_terms(n, [&](const NCPartition& p, std::size_t b) {
      const auto size = p.blocks[b].size();
      return p.outer[b] ? r[size] : kappa[size];
    });
    r[static_cast<std::size_t>(n)] = mu[static_cast<std::size_t>(n)] - rest;
  }
  return r;
}

std::vector<double> free_moments(const std::vector<double>& m1, const std::vector<double>& m2) {
  require(m1.size() == m2.size(), "moment lists must have equal order");
  const auto k1 = free_cumulants_from_moments(m1);
  const auto k2 = free_cumulants_from_moments(m2);
  std::vector<double> k(k1.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = k1[i] + k2[i];
  return moments_from_free_cumulants(k);
}

std::vector<double> cfree_moments(const std::vector<double>& mu1, const std::vector<double>& nu1,
                                  const std::vector<double>& mu2, const std::vector<double>& nu2) {
  require(mu1.size() == nu1.size() && mu1.size() == mu2.size() && mu1.size() == nu2.size(),
          "moment lists must have equal order");
  const auto r1 = cfree_cumulants(mu1, nu1);
  const auto r2 = cfree_cumulants(mu2, nu2);
  const auto k1 = free_cumulants_from_moments(nu1);
  const auto k2 = free_cumulants_from_moments(nu2);
  const int N = static_cast<int>(mu1.size()) - 1;
  std::vector<double> m(mu1.size(), 0.0);
  m[0] = 1.0;
  for (int n = 1; n <= N; ++n) {
    double acc = 0.0;
    for (const auto& p : nc_cached(n)) {
      double prod = 1.0;
      for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        const auto s = p.blocks[b].size();
        prod *= p.outer[b] ? r1[s] + r2[s] : k1[s] + k2[s];
      }
      acc += prod;
    }
    m[static_cast<std::size_t>(n)] = acc;
  }
  return m;
}

std::vector<double> classical_moments(const std::vector<double>& m1, const std::vector<double>& m2) {
  check_moments(m1, 12, "classical moments");
  check_moments(m2, 12, "classical moments");
  require(m1.size() == m2.size(), "moment lists must have equal order");
  std::vector<double> m(m1.size(), 0.0);
  for (std::size_t n = 0; n < m.size(); ++n)
    for (std::size_t k = 0; k <= n; ++k)
      m[n] += boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k)) *
              m1[k] * m2[n - k];
  return m;
}

}  // namespace cfree::oracle
