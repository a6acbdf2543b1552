#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cfree/expr.hpp"
#include "cfree/io.hpp"

namespace {

using namespace cfree;
using io::Json;

enum ExitCode { kOk = 0, kFailure = 1, kParse = 2, kNumeric = 3, kPrecondition = 4 };

struct Globals {
  std::size_t grid_n = 2048;
  std::vector<double> window;
  std::optional<double> tol;
  std::string out;
  std::string format = "csv";
};

EvalSettings eval_settings(const Globals& g) {
  EvalSettings s;
  s.grid_n = g.grid_n;
  s.conv.inversion.grid_n = g.grid_n;
  if (!g.window.empty()) {
    require(g.window.size() == 2 && g.window[0] < g.window[1], "--window takes lo < hi");
    s.window = std::pair{g.window[0], g.window[1]};
  }
  return s;
}

InfdivSettings infdiv_settings(const Globals& g) {
  InfdivSettings s;
  s.conv = eval_settings(g).conv;
  return s;
}

std::string csv_num(double x) { return fmt::format("{:.12g}", x); }

void emit_measure(std::ostream& out, const Measure& m, bool json, bool cdf) {
  if (json)
    out << io::measure_to_json(m).dump(2) << '\n';
  else if (cdf)
    io::write_cdf_csv(out, m);
  else
    io::write_measure_csv(out, m);
}

void emit_result(std::ostream& out, const EvalResult& r, bool json, bool cdf) {
  if (const auto* m = std::get_if<Measure>(&r)) return emit_measure(out, *m, json, cdf);
  const auto& p = std::get<CFreePair>(r);
  if (json) {
    out << io::pair_to_json(p).dump(2) << '\n';
    return;
  }
  out << "# component,mu\n";
  emit_measure(out, p.mu, false, cdf);
  out << "# component,nu\n";
  emit_measure(out, p.nu, false, cdf);
}

EvalResult evaluate_text(const std::string& text, const Globals& g) {
  return evaluate(parse_expr(text), eval_settings(g));
}

void cmd_density(std::ostream& out, const std::string& text, bool cdf, const Globals& g) {
  emit_result(out, evaluate_text(text, g), g.format == "json", cdf);
}

void cmd_convolve(std::ostream& out, const std::string& text, const Globals& g) {
  const Expr e = parse_expr(text);
  static const std::vector<std::string> convs = {"cconv", "bconv", "fconv", "cfconv"};
  require(std::find(convs.begin(), convs.end(), e.name) != convs.end(),
          fmt::format("convolve expects a convolution at the top level, got '{}'", e.name));
  emit_result(out, evaluate(e, eval_settings(g)), g.format == "json", false);
}

void cmd_transforms(std::ostream& out, const std::string& text, const std::string& at, const Globals& g) {
  const EvalResult r = evaluate_text(text, g);
  const auto zs = io::parse_z_list(at);
  auto G = [&](cplx z) {
    if (const auto* m = std::get_if<Measure>(&r)) return cauchy_G(*m, z);
    return pair_G_mu(std::get<CFreePair>(r), z);
  };
  Json rows = Json::array();
  if (g.format != "json") out << "z_re,z_im,G_re,G_im,F_re,F_im,E_re,E_im\n";
  for (const cplx z : zs) {
    require(z.imag() > 0.0, "transforms are evaluated on Im z > 0");
    const cplx gv = G(z);
    const cplx f = 1.0 / gv;
    const cplx e = z - f;
    if (g.format == "json") {
      rows.push_back({{"z", io::complex_to_json(z)},
                      {"G", io::complex_to_json(gv)},
                      {"F", io::complex_to_json(f)},
                      {"E", io::complex_to_json(e)}});
    } else {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", csv_num(z.real()), csv_num(z.imag()), csv_num(gv.real()),
                         csv_num(gv.imag()), csv_num(f.real()), csv_num(f.imag()), csv_num(e.real()),
                         csv_num(e.imag()));
    }
  }
  if (g.format == "json") out << rows.dump(2) << '\n';
}

void cmd_limit(std::ostream& out, const std::string& path, const Globals& g) {
  const ArrayScenario sc = io::scenario_from_json(io::read_json_file(path));
  HarnessSettings hs;
  hs.conv = eval_settings(g).conv;
  if (g.tol) hs.levy_tol = *g.tol;
  const HarnessReport rep = array_harness(sc, hs);
  if (g.format == "json") {
    Json j;
    j["scenario"] = io::scenario_to_json(sc);
    j["n"] = rep.n;
    j["routes"] = Json::array();
    for (const auto& r : rep.routes)
      j["routes"].push_back({{"name", r.name}, {"levy", r.levy}, {"monotone", r.monotone}, {"passed", r.passed}});
    j["params"] = Json::array();
    for (std::size_t i = 0; i < rep.n.size(); ++i)
      j["params"].push_back({{"n", rep.n[i]},
                             {"gamma", rep.params_mu[i].gamma_n},
                             {"sigma_mass", rep.params_mu[i].sigma_n.total_mass()},
                             {"gamma2", rep.params_nu[i].gamma_n},
                             {"sigma2_mass", rep.params_nu[i].sigma_n.total_mass()}});
    j["extrapolated"] = io::generators_to_json(rep.extrapolated);
    j["nu_cauchy_gap"] = rep.nu_cauchy_gap;
    j["closing_residual"] = rep.closing_residual;
    j["infdiv"] = {{"accepted", rep.infdiv.accepted()},
                   {"residual_phi", rep.infdiv.first.residual},
                   {"residual_nu", rep.infdiv.second.residual}};
    j["failures"] = rep.failures;
    j["passed"] = rep.passed();
    out << j.dump(2) << '\n';
    return;
  }
  out << "route,n,levy\n";
  for (const auto& r : rep.routes)
    for (std::size_t i = 0; i < r.levy.size(); ++i) out << r.name << ',' << rep.n[i] << ',' << csv_num(r.levy[i]) << '\n';
  out << "# closing_residual," << csv_num(rep.closing_residual) << '\n';
  out << "# infdiv_residual," << csv_num(std::max(rep.infdiv.first.residual, rep.infdiv.second.residual)) << '\n';
  out << "# passed," << (rep.passed() ? "true" : "false") << '\n';
  for (const auto& f : rep.failures) out << "# failure," << f << '\n';
}

// Either a generator pair {gamma, sigma, gamma2, sigma2} or a measure pair {mu, nu}.
void cmd_infdiv(std::ostream& out, const std::string& path, bool extract, const Globals& g) {
  const Json input = io::read_json_file(path);
  const InfdivSettings s = infdiv_settings(g);
  const double tol = g.tol.value_or(1e-4);
  const CFreePair pair =
      input.contains("gamma") ? cfree_limit_law(io::generators_from_json(input), s) : io::pair_from_json(input);
  const InfdivCheck check = check_infdiv(pair, tol);
  std::optional<ExtractedGenerators> extracted;
  if (extract && check.accepted()) extracted = extract_generators(pair, {}, s);
  if (g.format == "json") {
    Json j;
    j["accepted"] = check.accepted();
    j["tolerance"] = tol;
    j["residual_phi"] = check.first.residual;
    j["residual_nu"] = check.second.residual;
    j["cone"] = {{"alpha", check.cone.alpha}, {"beta", check.cone.beta}};
    j["fit"] = io::generators_to_json(check.generators());
    if (extracted) {
      j["extracted"] = io::generators_to_json(extracted->generators);
      j["extraction_residual"] = extracted->residual;
    }
    out << j.dump(2) << '\n';
    return;
  }
  out << "quantity,value\n";
  out << "accepted," << (check.accepted() ? 1 : 0) << '\n';
  out << "residual_phi," << csv_num(check.first.residual) << '\n';
  out << "residual_nu," << csv_num(check.second.residual) << '\n';
  out << "gamma," << csv_num(check.first.params.gamma) << '\n';
  out << "sigma_mass," << csv_num(check.first.params.sigma.total_mass()) << '\n';
  out << "gamma2," << csv_num(check.second.params.gamma) << '\n';
  out << "sigma2_mass," << csv_num(check.second.params.sigma.total_mass()) << '\n';
  if (extracted) {
    const auto& e = extracted->generators;
    out << "extracted_gamma," << csv_num(e.first.gamma) << '\n';
    out << "extracted_sigma_mass," << csv_num(e.first.sigma.total_mass()) << '\n';
    out << "extracted_gamma2," << csv_num(e.second.gamma) << '\n';
    out << "extracted_sigma2_mass," << csv_num(e.second.sigma.total_mass()) << '\n';
  }
}

void cmd_stable_evaluate(std::ostream& out, const std::string& path, const std::string& at, const Globals& g) {
  const StableFunction f = io::stable_from_json(io::read_json_file(path));
  const auto zs = io::parse_z_list(at);
  Json rows = Json::array();
  if (g.format != "json") out << "z_re,z_im,value_re,value_im\n";
  for (const cplx z : zs) {
    const cplx v = eval_stable(f, z);
    if (g.format == "json")
      rows.push_back({{"z", io::complex_to_json(z)}, {"value", io::complex_to_json(v)}});
    else
      out << fmt::format("{},{},{},{}\n", csv_num(z.real()), csv_num(z.imag()), csv_num(v.real()), csv_num(v.imag()));
  }
  if (g.format == "json") out << rows.dump(2) << '\n';
}

void cmd_stable_check(std::ostream& out, const std::string& path, const std::vector<double>& a_tests,
                      const Globals& g) {
  const StableFunction f = io::stable_from_json(io::read_json_file(path));
  const double tol = g.tol.value_or(1e-10);
  Json rows = Json::array();
  if (g.format != "json") out << "a,b,c,residual,accepted\n";
  for (const double a : a_tests) {
    const StabilityResult r = check_stability(f, a);
    const bool ok = r.residual <= tol;
    if (g.format == "json")
      rows.push_back({{"a", a}, {"b", r.b}, {"c", r.c}, {"residual", r.residual}, {"accepted", ok}});
    else
      out << fmt::format("{},{},{},{},{}\n", csv_num(a), csv_num(r.b), csv_num(r.c), csv_num(r.residual), ok ? 1 : 0);
  }
  if (g.format == "json") out << Json{{"params", io::stable_to_json(f)}, {"checks", rows}}.dump(2) << '\n';
}

// {phi: params, psi: params}, or a single parameter set used for both.
void cmd_stable_construct(std::ostream& out, const std::string& path, const Globals& g) {
  const Json input = io::read_json_file(path);
  const bool split = input.contains("phi");
  const StableFunction phi = io::stable_from_json(split ? input.at("phi") : input);
  const StableFunction psi = io::stable_from_json(split ? input.at("psi") : input);
  emit_result(out, make_stable_pair(phi, psi, infdiv_settings(g)), g.format == "json", false);
}

void print_parse_error(const ParseError& e, const std::string& text) {
  std::cerr << "parse error at " << e.line() << ':' << e.column() << ": " << e.detail() << '\n';
  std::istringstream lines(text);
  std::string line;
  for (int k = 1; std::getline(lines, line); ++k)
    if (k == e.line()) {
      std::cerr << "  " << line << "\n  " << std::string(static_cast<std::size_t>(e.column() - 1), ' ') << "^\n";
      break;
    }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical transforms and convolutions of probability measures and measure pairs"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--grid-n", g.grid_n, "density grid size")->check(CLI::Range(16, 1 << 20));
  app.add_option("--window", g.window, "density window: lo hi")->expected(2);
  app.add_option("--tol", g.tol, "acceptance tolerance of the command");
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));

  std::string text;
  std::string file;
  std::string at;
  bool cdf = false;
  bool extract = false;
  std::vector<double> a_tests = {0.5, 1.0, 2.0};

  auto* density = app.add_subcommand("density", "evaluate an expression and emit its density");
  density->add_option("expr", text, "measure expression")->required();
  density->add_flag("--cdf", cdf, "emit x,cdf instead of x,density");

  auto* convolve = app.add_subcommand("convolve", "evaluate a convolution expression");
  convolve->add_option("expr", text, "convolution expression")->required();

  auto* limit = app.add_subcommand("limit", "run the triangular-array harness on a scenario file");
  limit->add_option("scenario", file, "scenario JSON")->required();

  auto* infdiv = app.add_subcommand("infdiv", "check infinite divisibility of a pair");
  infdiv->add_option("pair", file, "generator pair or measure pair JSON")->required();
  infdiv->add_flag("--extract", extract, "also recover generators through the semigroup");

  auto* stable = app.add_subcommand("stable", "stable-law tools");
  stable->require_subcommand(1);
  auto* st_eval = stable->add_subcommand("evaluate", "evaluate a stable function");
  st_eval->add_option("params", file, "parameter JSON")->required();
  st_eval->add_option("--at", at, "z-list, e.g. '1+2i;0.5i'")->required();
  auto* st_check = stable->add_subcommand("check", "solve the stability identity");
  st_check->add_option("params", file, "parameter JSON")->required();
  st_check->add_option("--a-test", a_tests, "scales to test");
  auto* st_construct = stable->add_subcommand("construct", "build the pair of a stable (phi, psi)");
  st_construct->add_option("params", file, "parameter JSON")->required();

  auto* transforms = app.add_subcommand("transforms", "emit G, F and E at given points");
  transforms->add_option("expr", text, "measure or pair expression")->required();
  transforms->add_option("--at", at, "z-list, e.g. '1+2i;0.5i'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    std::ofstream file_out;
    if (!g.out.empty()) {
      file_out.open(g.out);
      require(static_cast<bool>(file_out), fmt::format("cannot write '{}'", g.out));
    }
    std::ostream& out = g.out.empty() ? std::cout : file_out;
    if (*density)
      cmd_density(out, text, cdf, g);
    else if (*convolve)
      cmd_convolve(out, text, g);
    else if (*limit)
      cmd_limit(out, file, g);
    else if (*infdiv)
      cmd_infdiv(out, file, extract, g);
    else if (*st_eval)
      cmd_stable_evaluate(out, file, at, g);
    else if (*st_check)
      cmd_stable_check(out, file, a_tests, g);
    else if (*st_construct)
      cmd_stable_construct(out, file, g);
    else if (*transforms)
      cmd_transforms(out, text, at, g);
    out.flush();
    return kOk;
  } catch (const ParseError& e) {
    print_parse_error(e, text);
    return kParse;
  } catch (const Json::parse_error& e) {
    std::cerr << "JSON syntax error: " << e.what() << '\n';
    return kParse;
  } catch (const Json::exception& e) {
    std::cerr << "precondition failure: " << e.what() << '\n';
    return kPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failure: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
