#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cfree/arrays.hpp"
#include "cfree/infdiv.hpp"
#include "cfree/stable.hpp"

namespace cfree::io {

using Json = nlohmann::json;

/// `x,density` rows at 12 significant digits, then a `# atom,location,mass`
/// comment block.
void write_measure_csv(std::ostream& out, const Measure& m);
/// `x,cdf` rows at the density nodes and at both sides of every atom.
void write_cdf_csv(std::ostream& out, const Measure& m);

/// {atoms: [[location, mass], …], grid: {start, step, n} | null, values: […]}.
Json measure_to_json(const Measure& m);
Measure measure_from_json(const Json& j);

/// {mu: measure, nu: measure}.
Json pair_to_json(const CFreePair& p);
CFreePair pair_from_json(const Json& j);

/// {gamma, sigma: measure, gamma2, sigma2: measure}.
Json generators_to_json(const CFreeGeneratorPair& g);
CFreeGeneratorPair generators_from_json(const Json& j);

/// {family, n_ladder, params, shifts: [shift_mu, shift_nu]}; n_ladder and
/// shifts are optional.
ArrayScenario scenario_from_json(const Json& j);
Json scenario_to_json(const ArrayScenario& sc);

/// {family, a, b, alpha}; complex numbers are [re, im] or a plain number.
StableFunction stable_from_json(const Json& j);
Json stable_to_json(const StableFunction& f);

Json complex_to_json(cplx z);
cplx complex_from_json(const Json& j);

/// Parses `a+bi`, `a-bi`, `bi`, `a`; entries separated by ';' or whitespace.
std::vector<cplx> parse_z_list(std::string_view text);

/// Reads and parses a JSON file; syntax errors surface as Json::parse_error.
Json read_json_file(const std::string& path);

/// Shortest round-trip text for doubles; NaN and infinities as strings.
std::string format_number(double x);

}  // namespace cfree::io
