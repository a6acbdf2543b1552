#include "cfree/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace cfree::io {

namespace {

std::string csv_number(double x) { return fmt::format("{:.12g}", x); }

double parse_double(std::string_view s, std::string_view what) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw PreconditionError(fmt::format("malformed {} '{}'", what, s));
  return v;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw PreconditionError(fmt::format("missing JSON field '{}'", key));
  return j.at(key);
}

double number_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw PreconditionError(fmt::format("JSON field '{}' must be a number", key));
  return v.get<double>();
}

cplx parse_complex(std::string_view s) {
  if (s.empty() || s.back() != 'i') return {parse_double(s, "complex number"), 0.0};
  s.remove_suffix(1);
  // Split at the last sign that is not the leading one and not an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = s.size(); k-- > 1;)
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  const std::string_view re = split == std::string_view::npos ? std::string_view{} : s.substr(0, split);
  std::string_view im = split == std::string_view::npos ? s : s.substr(split);
  double im_value = 0.0;
  if (im.empty() || im == "+")
    im_value = 1.0;
  else if (im == "-")
    im_value = -1.0;
  else
    im_value = parse_double(im, "complex number");
  return {re.empty() ? 0.0 : parse_double(re, "complex number"), im_value};
}

}  // namespace

std::string format_number(double x) { return fmt::format("{}", x); }

void write_measure_csv(std::ostream& out, const Measure& m) {
  out << "x,density\n";
  if (const auto& d = m.density()) {
    for (Eigen::Index i = 0; i < d->size(); ++i)
      out << csv_number(d->node(i)) << ',' << csv_number(d->values[i]) << '\n';
  }
  out << "# atom,location,mass\n";
  for (const Atom& a : m.atoms()) out << "# atom," << csv_number(a.location) << ',' << csv_number(a.mass) << '\n';
}

void write_cdf_csv(std::ostream& out, const Measure& m) {
  std::vector<double> xs;
  if (const auto& d = m.density())
    for (Eigen::Index i = 0; i < d->size(); ++i) xs.push_back(d->node(i));
  for (const Atom& a : m.atoms()) xs.push_back(a.location);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  out << "x,cdf\n";
  for (const double x : xs) out << csv_number(x) << ',' << csv_number(m.cdf(x)) << '\n';
}

Json measure_to_json(const Measure& m) {
  Json j;
  j["atoms"] = Json::array();
  for (const Atom& a : m.atoms()) j["atoms"].push_back({a.location, a.mass});
  j["values"] = Json::array();
  if (const auto& d = m.density()) {
    j["grid"] = {{"start", d->start}, {"step", d->step}, {"n", d->size()}};
    for (Eigen::Index i = 0; i < d->size(); ++i) j["values"].push_back(d->values[i]);
  } else {
    j["grid"] = nullptr;
  }
  return j;
}

Measure measure_from_json(const Json& j) {
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const Json& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw PreconditionError("atoms must be [location, mass] pairs");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
  }
  std::optional<DensityGrid> density;
  if (j.contains("grid") && !j.at("grid").is_null()) {
    const Json& g = j.at("grid");
    DensityGrid d;
    d.start = number_field(g, "start");
    d.step = number_field(g, "step");
    const Json& values = field(j, "values");
    if (!values.is_array()) throw PreconditionError("'values' must be an array");
    if (g.contains("n") && g.at("n").get<std::size_t>() != values.size())
      throw PreconditionError("grid n does not match the number of values");
    d.values.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) d.values[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    density = std::move(d);
  }
  return Measure(std::move(atoms), std::move(density));
}

Json pair_to_json(const CFreePair& p) { return {{"mu", measure_to_json(p.mu)}, {"nu", measure_to_json(p.nu)}}; }

CFreePair pair_from_json(const Json& j) {
  return make_pair(measure_from_json(field(j, "mu")), measure_from_json(field(j, "nu")));
}

Json generators_to_json(const CFreeGeneratorPair& g) {
  return {{"gamma", g.first.gamma},
          {"sigma", measure_to_json(g.first.sigma)},
          {"gamma2", g.second.gamma},
          {"sigma2", measure_to_json(g.second.sigma)}};
}

CFreeGeneratorPair generators_from_json(const Json& j) {
  CFreeGeneratorPair g;
  g.first.gamma = number_field(j, "gamma");
  g.first.sigma = measure_from_json(field(j, "sigma"));
  g.second.gamma = number_field(j, "gamma2");
  g.second.sigma = measure_from_json(field(j, "sigma2"));
  validate(g.first);
  validate(g.second);
  return g;
}

ArrayScenario scenario_from_json(const Json& j) {
  ArrayScenario sc;
  const Json& family = field(j, "family");
  if (!family.is_string()) throw PreconditionError("'family' must be a string");
  sc.family = family.get<std::string>();
  if (j.contains("n_ladder")) sc.n_ladder = j.at("n_ladder").get<std::vector<int>>();
  if (j.contains("params")) sc.params = j.at("params").get<std::vector<double>>();
  if (j.contains("shifts")) {
    const auto shifts = j.at("shifts").get<std::vector<double>>();
    if (shifts.size() != 2) throw PreconditionError("'shifts' must be [shift_mu, shift_nu]");
    sc.shift_mu = shifts[0];
    sc.shift_nu = shifts[1];
  }
  // Rejects unknown families and bad parameters before any work is done.
  for (const int c : {0, 1}) scenario_rows(sc, c);
  scenario_generators(sc);
  return sc;
}

Json scenario_to_json(const ArrayScenario& sc) {
  return {{"family", sc.family},
          {"n_ladder", sc.n_ladder},
          {"params", sc.params},
          {"shifts", {sc.shift_mu, sc.shift_nu}}};
}

Json complex_to_json(cplx z) { return {z.real(), z.imag()}; }

cplx complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  throw PreconditionError("complex values are [re, im], a number or a string like 1-2i");
}

StableFunction stable_from_json(const Json& j) {
  const Json& family = field(j, "family");
  if (!family.is_string()) throw PreconditionError("'family' must be a string");
  const double alpha = j.contains("alpha") ? j.at("alpha").get<double>() : 1.0;
  return make_stable(parse_stable_family(family.get<std::string>()), complex_from_json(field(j, "a")),
                     complex_from_json(field(j, "b")), alpha);
}

Json stable_to_json(const StableFunction& f) {
  return {{"family", std::string(stable_family_name(f.family))},
          {"a", complex_to_json(f.a)},
          {"b", complex_to_json(f.b)},
          {"alpha", f.alpha}};
}

std::vector<cplx> parse_z_list(std::string_view text) {
  std::vector<cplx> out;
  std::size_t k = 0;
  auto separator = [](char c) { return c == ';' || c == ' ' || c == '\t' || c == '\n'; };
  while (k < text.size()) {
    while (k < text.size() && separator(text[k])) ++k;
    std::size_t e = k;
    while (e < text.size() && !separator(text[e])) ++e;
    if (e > k) out.push_back(parse_complex(text.substr(k, e - k)));
    k = e;
  }
  require(!out.empty(), "empty z-list");
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError(fmt::format("cannot open '{}'", path));
  return Json::parse(in);
}

}  // namespace cfree::io
