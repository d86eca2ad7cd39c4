#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "apiso/domain.hpp"
#include "apiso/integrate.hpp"
#include "apiso/isometry.hpp"
#include "apiso/kernel.hpp"
#include "apiso/laurent.hpp"
#include "apiso/maps.hpp"
#include "apiso/scenarios.hpp"

namespace apiso {

nlohmann::json to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

/// {"kind": ..., "params": {...}}.
nlohmann::json to_json(const DomainSpec& spec);
DomainSpec domain_spec_from_json(const nlohmann::json& j);

/// [{"exp": [...], "re": ..., "im": ...}, ...] in increasing exponent order.
nlohmann::json to_json(const LaurentPolynomial& f);
LaurentPolynomial laurent_from_json(const nlohmann::json& j);

/// {"exponents": [[...], ...], "coefficients": [{"re", "im"}, ...]}.
nlohmann::json to_json(const MonomialMap& m);
MonomialMap monomial_map_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PNormResult& r);
nlohmann::json to_json(const KernelEstimate& k);
nlohmann::json to_json(const IsometryVerification& v);
nlohmann::json to_json(const EquimeasureReport& r);

/// {label, checks: [{name, citation, expected, observed, tolerance, verdict}], pass, metadata, notes}.
nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

/// {name, k, m, p, a: {re, im}, map, seed, samples, mutation}; absent keys keep defaults.
ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSpec& s);

/// Parses JSON text, throwing InvalidArgument with a one-line message on error.
nlohmann::json parse_json_text(std::string_view text);

}  // namespace apiso
