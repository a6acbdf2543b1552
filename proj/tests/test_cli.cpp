#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cfree/expr.hpp"
#include "cfree/io.hpp"
#include "support.hpp"

using namespace cfree;
using namespace cfree::testing;

namespace {

bool same_tree(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) return false;
  if (a.kind == Expr::Kind::Number && a.number != b.number) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_tree(a.args[i], b.args[i])) return false;
  return true;
}

struct Malformed {
  const char* text;
  int line;
  int column;
};

// Positions are 1-based; see the grammar in expr.hpp.
const Malformed kMalformed[] = {
    {"fconv(semicircle(0,2)", 1, 22},             // unbalanced parenthesis
    {"fconv(delta(0), bogus(2))", 1, 17},          // unknown identifier
    {"semicircle(0)", 1, 1},                       // arity
    {"cfconv(delta(0), delta(1))", 1, 8},          // pair expected
    {"bconv(delta(0),\n  delta(1)))", 2, 12},       // trailing input
    {"delta(1,)", 1, 9},                           // missing argument
    {"bconv(delta(0) delta(1))", 1, 16},           // missing comma
};

}  // namespace

TEST_CASE("parse examples") {
  const Expr f = parse_expr("fconv(semicircle(0,2), semicircle(0,2))");
  CHECK(f.kind == Expr::Kind::Call);
  CHECK(f.name == "fconv");
  REQUIRE(f.args.size() == 2);
  for (const Expr& leaf : f.args) {
    CHECK(leaf.name == "semicircle");
    CHECK(leaf.type() == Expr::Type::Measure);
  }
  CHECK(f.args[1].column == 24);

  const Expr c = parse_expr("cfconv(pair(bernoulli(1), delta(0)), pair(bernoulli(1), delta(0)))");
  CHECK(c.name == "cfconv");
  CHECK(c.type() == Expr::Type::Pair);
  CHECK(c.args[0].type() == Expr::Type::Pair);

  const Expr w = parse_expr("  affine( gaussian(0 , 1),\n\t2, -0.5e1 )  ");
  CHECK(w.args[2].number == -5.0);
  CHECK(w.args[1].line == 2);
  CHECK(parse_expr("delta(+1.5)").args[0].number == 1.5);
}

TEST_CASE("malformed inputs report exact positions") {
  for (const auto& [text, line, column] : kMalformed) {
    INFO(text);
    try {
      parse_expr(text);
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == column);
      CHECK(std::string(e.what()).rfind(std::to_string(line) + ":" + std::to_string(column) + ": ", 0) == 0);
    }
  }
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("1.5"), ParseError);
  CHECK_THROWS_AS(parse_expr("affine(pair(delta(0), delta(0)), 1)"), ParseError);
}

TEST_CASE("print and parse round trip") {
  const char* inputs[] = {
      "fconv(semicircle(0,2), semicircle(0,2))",
      "cfconv(pair(bernoulli(1), delta(0)), pair(bernoulli(1), delta(0)))",
      "affine(cconv(gaussian(0.1, 0.3), arcsine(-1, 0.25)), 2, 1e-7)",
      "bconv(freepoisson(0.5), freepoisson(1, 2), delta(3.14159))",
      "affine(pair(delta(1), semicircle(0, 1)), 0.5, 0.1)",
  };
  for (const char* text : inputs) {
    INFO(text);
    const Expr once = parse_expr(text);
    const std::string printed = print_expr(once);
    const Expr twice = parse_expr(printed);
    CHECK(same_tree(once, twice));
    CHECK(print_expr(twice) == printed);
  }
}

TEST_CASE("evaluate examples") {
  const Measure d = std::get<Measure>(evaluate(parse_expr("delta(1)")));
  CHECK(levy_distance(d, dirac(1.0)) == 0.0);

  const Measure b = std::get<Measure>(evaluate(parse_expr("bconv(bernoulli(1), bernoulli(1))")));
  REQUIRE(b.atoms().size() == 2);
  CHECK(b.atoms()[0].location == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-6));
  CHECK(b.atoms()[1].location == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(b.atoms()[0].mass == doctest::Approx(0.5).epsilon(1e-6));

  const Measure a = std::get<Measure>(evaluate(parse_expr("fconv(bernoulli(1), bernoulli(1))")));
  CHECK(levy_distance(a, arcsine(0.0, 2.0)) <= 5e-3);

  const CFreePair p =
      std::get<CFreePair>(evaluate(parse_expr("cfconv(pair(bernoulli(1), delta(0)), pair(bernoulli(1), delta(0)))")));
  CHECK(levy_distance(p.mu, boolean_conv(bern(1.0), bern(1.0))) <= 1e-3);

  const Measure s = std::get<Measure>(evaluate(parse_expr("affine(semicircle(0, 2), 2, 1)")));
  CHECK(mean(s) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(variance(s) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("evaluation errors carry the expression path") {
  try {
    evaluate(parse_expr("fconv(delta(0), affine(delta(1), -1, 0))"));
    FAIL("no error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("fconv@1:1 > affine@1:17") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate(parse_expr("semicircle(0, -1)")), PreconditionError);
}

TEST_CASE("evaluation is deterministic") {
  const Expr e = parse_expr("fconv(semicircle(0,2), bernoulli(0.5))");
  std::ostringstream a, b;
  io::write_measure_csv(a, std::get<Measure>(evaluate(e)));
  io::write_measure_csv(b, std::get<Measure>(evaluate(e)));
  CHECK(a.str() == b.str());
}

TEST_CASE("csv output") {
  std::ostringstream out;
  io::write_measure_csv(out, Measure({{-1.0, 0.25}, {0.5, 0.75}}));
  CHECK(out.str() == "x,density\n# atom,location,mass\n# atom,-1,0.25\n# atom,0.5,0.75\n");
  std::ostringstream cdf;
  io::write_cdf_csv(cdf, dirac(0.0));
  CHECK(cdf.str().rfind("x,cdf\n", 0) == 0);
}

TEST_CASE("json round trips") {
  for (const auto& [name, m] : test_families()) {
    INFO(name);
    const Measure back = io::measure_from_json(io::measure_to_json(m));
    CHECK(same_measure(back, m));
  }
  const CFreePair p = make_pair(bern(1.0), semicircle(0.0, 2.0));
  const CFreePair q = io::pair_from_json(io::pair_to_json(p));
  CHECK(same_measure(q.mu, p.mu));
  CHECK(same_measure(q.nu, p.nu));

  const CFreeGeneratorPair g{{0.5, Measure({{1.0, 0.5}})}, {-0.25, dirac(0.0)}};
  const CFreeGeneratorPair h = io::generators_from_json(io::generators_to_json(g));
  CHECK(h.first.gamma == 0.5);
  CHECK(h.second.gamma == -0.25);
  CHECK(same_measure(h.first.sigma, g.first.sigma));
  CHECK(same_measure(h.second.sigma, g.second.sigma));

  ArrayScenario sc;
  sc.family = "poisson";
  sc.params = {1.0, 1.0};
  sc.n_ladder = {8, 32};
  sc.shift_mu = 0.25;
  const ArrayScenario sc2 = io::scenario_from_json(io::scenario_to_json(sc));
  CHECK(sc2.family == sc.family);
  CHECK(sc2.params == sc.params);
  CHECK(sc2.n_ladder == sc.n_ladder);
  CHECK(sc2.shift_mu == sc.shift_mu);
  CHECK(sc2.shift_nu == sc.shift_nu);

  const StableFunction f = make_stable(StableFamily::PowerHigh, 0.5, std::polar(1.0, -0.25 * kPi), 1.5);
  const StableFunction f2 = io::stable_from_json(io::stable_to_json(f));
  CHECK(f2.family == f.family);
  CHECK(f2.a == f.a);
  CHECK(f2.b == f.b);
  CHECK(f2.alpha == f.alpha);
}

TEST_CASE("json inputs are validated") {
  using io::Json;
  CHECK_THROWS_AS(io::measure_from_json(Json::parse(R"({"atoms": [[0, -0.5]]})")), PreconditionError);
  CHECK_THROWS_AS(io::generators_from_json(Json::parse(R"({"gamma": 0, "sigma": {"atoms": [[0, -1]]}})")),
                  PreconditionError);
  CHECK_THROWS_AS(io::stable_from_json(Json::parse(R"({"family": "log", "a": 0, "b": 1})")), PreconditionError);
  CHECK_THROWS_AS(io::scenario_from_json(Json::parse(R"({"family": "cauchy"})")), PreconditionError);
  CHECK_THROWS_AS(io::scenario_from_json(Json::parse(R"({"family": "poisson", "params": [-1]})")), PreconditionError);
}

TEST_CASE("complex parsing") {
  const auto zs = io::parse_z_list("1+2i; 0.5i -3 2-1e-1i");
  REQUIRE(zs.size() == 4);
  CHECK(zs[0] == cplx{1.0, 2.0});
  CHECK(zs[1] == cplx{0.0, 0.5});
  CHECK(zs[2] == cplx{-3.0, 0.0});
  CHECK(zs[3] == cplx{2.0, -0.1});
  CHECK(io::complex_from_json(io::Json::parse("[1, -2]")) == cplx{1.0, -2.0});
  CHECK(io::complex_from_json(io::Json::parse("\"1-2i\"")) == cplx{1.0, -2.0});
  CHECK(io::complex_from_json(io::complex_to_json({0.25, 3.0})) == cplx{0.25, 3.0});
  CHECK_THROWS(io::parse_z_list("1+2j"));
  CHECK(io::format_number(0.1) == "0.1");
}
