// One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "cfree/arrays.hpp"
#include "cfree/expr.hpp"
#include "cfree/oracle.hpp"
#include "cfree/stable.hpp"
#include "support.hpp"

using namespace cfree;
using namespace cfree::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates a worst-case value against a bound.
struct Bound {
  std::string label;
  double limit;
  double worst = 0.0;
  void see(double v) { worst = std::max(worst, std::isnan(v) ? INFINITY : v); }
  bool ok() const { return worst <= limit; }
  std::string text() const { return fmt::format("{} {:.3g} <= {:.0e}", label, worst, limit); }
};

Outcome combine(std::initializer_list<Bound> bounds, std::vector<std::pair<std::string, bool>> flags = {}) {
  Outcome o;
  std::vector<std::string> parts;
  for (const auto& b : bounds) {
    o.pass = o.pass && b.ok();
    parts.push_back(b.text());
  }
  for (const auto& [name, ok] : flags) {
    o.pass = o.pass && ok;
    parts.push_back(fmt::format("{} {}", name, ok ? "yes" : "no"));
  }
  o.detail = fmt::format("{}", fmt::join(parts, "; "));
  return o;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double pair_levy(const CFreePair& a, const CFreePair& b) {
  return std::max(levy_distance(a.mu, b.mu), levy_distance(a.nu, b.nu));
}

LevyHincinParams lh(double gamma, Measure sigma = Measure()) { return {gamma, std::move(sigma)}; }
CFreeGeneratorPair gaussian_gen() { return {lh(0.0, dirac(0.0)), lh(0.0, dirac(0.0))}; }
CFreeGeneratorPair poisson_gen() { return {lh(0.5, Measure({{1.0, 0.5}})), lh(0.5, Measure({{1.0, 0.5}}))}; }

Outcome transform_axioms() {
  const auto t0 = Clock::now();
  std::mt19937 rng(1);
  Bound g{"max Im G", 0.0}, f{"max Im z - Im F", 0.0}, e{"max Im E", 0.0}, n{"|F(iy)/iy - 1|", 0.05};
  for (const auto& [name, m] : test_families()) {
    for (int k = 0; k < 100; ++k) {
      const cplx z = random_upper(rng);
      const double slack = 1e-12 * (1.0 + std::abs(z));
      g.see(cauchy_G(m, z).imag() - slack);
      f.see(z.imag() - f_transform(m, z).imag() - slack);
      e.see(e_transform(m, z).imag() - slack);
    }
    const auto [lo, hi] = m.support_hull();
    const cplx iy{0.0, 100.0 * std::max({std::abs(lo), std::abs(hi), 1.0})};
    n.see(std::abs(f_transform(m, iy) / iy - 1.0));
  }
  const double secs = seconds_since(t0);
  Outcome o = combine({g, f, e, n}, {{"runtime < 10 s", secs < 10.0}});
  o.detail += fmt::format(" ({:.1f} s)", secs);
  return o;
}

Outcome inversion_round_trips() {
  Bound l1{"density L1", 1e-2}, atom{"atom mass", 1e-3}, f{"invert_F residual", 1e-10};
  const std::vector<Measure> ms = {dirac(0.7), bern(1.0), semicircle(0.0, 2.0), arcsine(0.0, 2.0)};
  for (const Measure& m : ms) {
    const CauchyFn G = [&m](cplx z) { return cauchy_G(m, z); };
    Measure back;
    // Densities are inverted on their own grid window.
    if (const auto& d = m.density()) {
      back = stieltjes_invert(G, d->start, d->end());
      l1.see(density_l1_distance(back, m));
    } else {
      const auto [lo, hi] = m.support_hull();
      back = stieltjes_invert(G, lo - 1.0, hi + 1.0);
    }
    atom.see(std::abs(back.atom_mass() - m.atom_mass()));
  }
  for (const auto& [name, m] : test_families()) {
    const auto ctx = make_context(m);
    for (const cplx w : cone_points(ctx.cone, 100))
      f.see(std::abs(f_transform(m, invert_F(ctx, w)) - w) / (1.0 + std::abs(w)));
  }
  return combine({l1, atom, f});
}

Outcome subordination_contract() {
  std::mt19937 rng(13);
  std::vector<std::pair<Measure, Measure>> inputs = {{bern(1.0), bern(1.0)},
                                                     {bern(1.0), semicircle(0.0, 2.0)},
                                                     {semicircle(0.0, 2.0), arcsine(1.0, 1.0)}};
  while (inputs.size() < 5) inputs.emplace_back(random_atomic(rng), random_atomic(rng));
  Bound r{"|F1(w1) - F2(w2)|", 1e-10};
  const double h = 8.0 / 2047.0;
  for (const auto& [n1, n2] : inputs)
    for (const double y : {h, h / 2.0, h / 4.0})
      for (int i = 0; i <= 40; ++i) r.see(free_subordination(n1, n2, {-4.0 + 0.2 * i, y}).residual);
  return combine({r});
}

Outcome reductions() {
  Bound b{"boolean reduction", 1e-3}, fr{"free reduction", 1e-3}, id{"neutral element", 1e-3};
  const Measure m1 = bern(1.0), m2 = semicircle(0.5, 1.0);
  const CFreePair bp = cfree_conv(make_pair(m1, dirac(0.0)), make_pair(m2, dirac(0.0)));
  b.see(levy_distance(bp.mu, boolean_conv(m1, m2)));
  b.see(levy_distance(bp.nu, dirac(0.0)));
  const CFreePair fp = cfree_conv(make_pair(m1, m1), make_pair(m2, m2));
  const Measure f = free_conv(m1, m2);
  fr.see(std::max(levy_distance(fp.mu, f), levy_distance(fp.nu, f)));
  const Measure s = semicircle(0.3, 1.5);
  id.see(levy_distance(classical_conv(s, dirac(0.0)), s));
  id.see(levy_distance(boolean_conv(s, dirac(0.0)), s));
  id.see(levy_distance(free_conv(s, dirac(0.0)), s));
  const CFreePair p = make_pair(m1, m2);
  id.see(pair_levy(cfree_conv(p, make_pair(dirac(0.0), dirac(0.0))), p));
  return combine({b, fr, id});
}

Outcome oracle_equivalence() {
  const std::vector<std::size_t> catalan = {1, 1, 2, 5, 14, 42, 132, 429, 1430};
  bool counts = true;
  for (int n = 1; n <= 8; ++n) counts = counts && oracle::enumerate_nc(n).size() == catalan[static_cast<std::size_t>(n)];
  std::mt19937 rng(2024);
  ConvolutionSettings s;
  s.inversion.grid_n = 4096;
  Bound rel{"moment rel err", 1e-3};
  for (int t = 0; t < 10; ++t) {
    const CFreePair p1 = make_pair(random_atomic(rng), random_atomic(rng));
    const CFreePair p2 = make_pair(random_atomic(rng), random_atomic(rng));
    const auto want = oracle::cfree_moments(oracle::moments_of(p1.mu, 6), oracle::moments_of(p1.nu, 6),
                                            oracle::moments_of(p2.mu, 6), oracle::moments_of(p2.nu, 6));
    const auto got = oracle::moments_of(cfree_conv(p1, p2, s).mu, 6);
    for (std::size_t k = 1; k <= 6; ++k) rel.see(rel_err(got[k], want[k]));
  }
  return combine({rel}, {{"Catalan counts", counts}});
}

double radius(const Measure& m) {
  if (m.is_zero()) return 0.0;
  const auto [lo, hi] = m.support_hull();
  return std::max(std::abs(lo), std::abs(hi));
}

Outcome gaussian_harness(HarnessReport& rep) {
  const auto t0 = Clock::now();
  ArrayScenario sc;
  sc.family = "gaussian";
  rep = array_harness(sc);
  Bound b{"boolean", 0.05}, f{"free", 0.05}, c{"classical", 0.05}, q{"c-free", 0.05};
  Bound gam{"|gamma_n|", 1e-6}, close{"closing", 1e-2};
  b.see(levy_distance(rep.route("boolean").laws.back(), bern(1.0)));
  f.see(levy_distance(rep.route("free").laws.back(), semicircle(0.0, 2.0)));
  c.see(levy_distance(rep.route("classical").laws.back(), gaussian(0.0, 1.0)));
  const CFreePair limit = cfree_limit_law(gaussian_gen());
  q.see(levy_distance(rep.route("cfree").laws.back(), limit.mu));
  q.see(levy_distance(rep.route("cfree_nu").laws.back(), limit.nu));
  bool monotone = true;
  for (const char* name : {"boolean", "free", "classical"}) monotone = monotone && rep.route(name).monotone;
  bool mass_to_one = true, radius_to_zero = true;
  for (std::size_t i = 0; i < rep.params_mu.size(); ++i) {
    gam.see(std::abs(rep.params_mu[i].gamma_n));
    if (i > 0) {
      const double prev = std::abs(rep.params_mu[i - 1].sigma_n.total_mass() - 1.0);
      mass_to_one = mass_to_one && std::abs(rep.params_mu[i].sigma_n.total_mass() - 1.0) < prev;
      radius_to_zero = radius_to_zero && radius(rep.params_mu[i].sigma_n) < radius(rep.params_mu[i - 1].sigma_n);
    }
  }
  close.see(rep.closing_residual);
  const double secs = seconds_since(t0);
  Outcome o = combine({b, f, c, q, gam, close}, {{"monotone", monotone},
                                                  {"sigma mass -> 1", mass_to_one},
                                                  {"support -> 0", radius_to_zero},
                                                  {"runtime < 120 s", secs < 120.0}});
  o.detail += fmt::format(" ({:.1f} s)", secs);
  return o;
}

Outcome poisson_harness(HarnessReport& rep) {
  ArrayScenario sc;
  sc.family = "poisson";
  sc.params = {1.0, 1.0};
  rep = array_harness(sc);
  Bound gam{"|gamma_n - 0.5|", 0.02}, mass{"|sigma_n mass - 0.5|", 0.02};
  for (const auto* ps : {&rep.params_mu, &rep.params_nu}) {
    gam.see(std::abs(ps->back().gamma_n - 0.5));
    mass.see(std::abs(ps->back().sigma_n.total_mass() - 0.5));
  }
  return combine({gam, mass});
}

Outcome infdiv_triangle() {
  Bound fit{"check_infdiv residual", 1e-4}, semi{"semigroup Levy", 1e-2}, dg{"|d gamma|", 0.02},
      ds{"sigma Levy", 0.05};
  for (const auto& g : {gaussian_gen(), poisson_gen()}) {
    const CFreePair law = cfree_limit_law(g);
    const InfdivCheck c = check_infdiv(law);
    fit.see(std::max(c.first.residual, c.second.residual));
    const CFreePair half = semigroup_at(g, 0.5);
    semi.see(pair_levy(cfree_conv(half, half), semigroup_at(g, 1.0)));
    const ExtractedGenerators x = extract_generators(law);
    for (const auto& [got, want] : {std::pair{&x.generators.first, &g.first}, {&x.generators.second, &g.second}}) {
      dg.see(std::abs(got->gamma - want->gamma));
      ds.see(levy_distance(got->sigma.normalized(), want->sigma.normalized()));
    }
  }
  return combine({fit, semi, dg, ds});
}

Outcome array_limits_infdiv(const HarnessReport& g, const HarnessReport& p) {
  Bound r{"residual", 1e-4};
  for (const auto* rep : {&g, &p}) r.see(std::max(rep->infdiv.first.residual, rep->infdiv.second.residual));
  return combine({r});
}

Outcome stability_suite() {
  const StableFunction inv = make_stable(StableFamily::PowerHigh, 0.0, 1.0, 2.0);
  const std::vector<StableFunction> catalogue = {
      make_stable(StableFamily::Constant, 3.0, 0.0),
      make_stable(StableFamily::Constant, -1.0, -2.0),
      inv,
      make_stable(StableFamily::PowerHigh, 0.5, std::polar(1.0, -0.25 * kPi), 1.5),
      make_stable(StableFamily::PowerLow, 0.2, std::polar(1.0, -0.75 * kPi), 0.5),
      make_stable(StableFamily::Log, cplx{1.0, -0.5}, -1.0),
  };
  Bound cat{"catalogue residual", 1e-10}, cov{"covariance", 1e-6}, gauss{"Gaussian pair Levy", 1e-2};
  for (const auto& f : catalogue)
    for (const double a : {0.5, 1.0, 2.0}) cat.see(check_stability(f, a).residual);

  const Measure two_atom({{-1.0, 0.3}, {2.0, 0.7}});
  double rejected = INFINITY;
  for (const double a : {0.5, 1.0, 2.0})
    rejected = std::min(rejected, check_stability([&](cplx z) { return e_transform(two_atom, z); }, a).residual);

  std::mt19937 rng(41);
  for (const AffineMap map : {AffineMap{2.0, 0.0}, AffineMap{2.0, 0.3}, AffineMap{0.5, -0.2}}) {
    const CFreePair p = make_pair(random_atomic(rng), random_atomic(rng));
    const CFreePair q = push_pair(p, map);
    const TransformContext cp = make_context(p.nu), cq = make_context(q.nu);
    const double beta = 2.0 * std::max(cp.cone.beta, cq.cone.beta) / std::min(map.a, 1.0);
    for (const cplx z : cone_points({1.0, beta}, 20))
      cov.see(std::abs(phi_transform(q.mu, cq, z) - (phi_transform(p.mu, cp, map.a * z) - map.b) / map.a));
  }

  gauss.see(pair_levy(make_stable_pair(inv, inv), cfree_limit_law(gaussian_gen())));
  Outcome o = combine({cat, cov, gauss}, {{"non-catalogue rejected", rejected > 1e-3}});
  o.detail += fmt::format(" (non-catalogue residual {:.3g})", rejected);
  return o;
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>/dev/null", CFREE_CLI_PATH, args, out.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / fmt::format("cfree-acceptance-{}", ::getpid());
  fs::create_directories(dir);
  const auto write = [&](const char* name, const char* text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };

  bool identical = true;
  for (const char* args : {"density \"fconv(semicircle(0,2), bernoulli(0.5))\"",
                           "--format json convolve \"cfconv(pair(bernoulli(1), delta(0)), pair(semicircle(0,1), delta(0)))\"",
                           "transforms \"arcsine(0,2)\" --at \"1+2i;0.5i\""}) {
    const int a = run_cli(args, dir / "a.out");
    const int b = run_cli(args, dir / "b.out");
    identical = identical && a == 0 && b == 0 && slurp(dir / "a.out") == slurp(dir / "b.out");
  }

  struct Case {
    const char* text;
    int line, column;
  };
  const Case malformed[] = {{"fconv(semicircle(0,2)", 1, 22},
                            {"fconv(delta(0), bogus(2))", 1, 17},
                            {"semicircle(0)", 1, 1},
                            {"cfconv(delta(0), delta(1))", 1, 8},
                            {"bconv(delta(0),\n  delta(1)))", 2, 12}};
  int exact = 0;
  for (const auto& c : malformed) {
    try {
      parse_expr(c.text);
    } catch (const ParseError& e) {
      exact += e.line() == c.line && e.column() == c.column;
    }
  }

  const std::string heavy = write("heavy.json", R"({"family": "power_low", "a": 0, "b": [-1, 0], "alpha": 0.1})");
  const std::string bad = write("bad.json", R"({"gamma": 0, "sigma": {"atoms": [[0, -1]]}})");
  const std::vector<std::pair<std::string, int>> codes = {{"density \"delta(1)\"", 0},
                                                          {"density \"fconv(semicircle(0,2)\"", 2},
                                                          {"stable construct " + heavy, 3},
                                                          {"density \"semicircle(0,-1)\"", 4},
                                                          {"infdiv " + bad, 4}};
  std::vector<std::string> wrong;
  for (const auto& [args, want] : codes)
    if (const int got = run_cli(args, dir / "c.out"); got != want) wrong.push_back(fmt::format("{} -> {}", args, got));
  fs::remove_all(dir);

  Outcome o;
  o.pass = identical && exact == 5 && wrong.empty();
  o.detail = fmt::format("byte-identical {}; exact error positions {}/5; exit codes {}", identical ? "yes" : "no",
                         exact, wrong.empty() ? "0/2/3/4 as specified" : fmt::format("{}", fmt::join(wrong, ", ")));
  return o;
}

}  // namespace

int main() {
  HarnessReport gaussian_rep, poisson_rep;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"transform axioms", transform_axioms},
      {"inversion round trips", inversion_round_trips},
      {"subordination contract", subordination_contract},
      {"reduction identities", reductions},
      {"oracle equivalence", oracle_equivalence},
      {"array harness, Gaussian scenario", [&] { return gaussian_harness(gaussian_rep); }},
      {"array harness, Poisson scenario", [&] { return poisson_harness(poisson_rep); }},
      {"infinite divisibility triangle", infdiv_triangle},
      {"array limits are infinitely divisible", [&] { return array_limits_infdiv(gaussian_rep, poisson_rep); }},
      {"stability suite", stability_suite},
      {"CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    std::cout << fmt::format("{} {:>2} {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
