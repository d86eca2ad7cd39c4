#include "apiso/serialize.hpp"

#include <string>

namespace apiso {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing key '") + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("bad value for '") + what + "'");
  }
}

template <class T>
void read_optional(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j.at(key), key);
}

DomainSpec::Kind parse_kind(const std::string& s) {
  if (s == "disc") return DomainSpec::Kind::disc;
  if (s == "punctured_disc") return DomainSpec::Kind::punctured_disc;
  if (s == "polydisc") return DomainSpec::Kind::polydisc;
  if (s == "ball") return DomainSpec::Kind::ball;
  if (s == "hartogs") return DomainSpec::Kind::hartogs;
  if (s == "fk_ball_prime") return DomainSpec::Kind::fk_ball_prime;
  if (s == "product") return DomainSpec::Kind::product;
  throw InvalidArgument("unknown domain kind '" + s + "'");
}

std::string kind_name(DomainSpec::Kind k) {
  switch (k) {
    case DomainSpec::Kind::disc: return "disc";
    case DomainSpec::Kind::punctured_disc: return "punctured_disc";
    case DomainSpec::Kind::polydisc: return "polydisc";
    case DomainSpec::Kind::ball: return "ball";
    case DomainSpec::Kind::hartogs: return "hartogs";
    case DomainSpec::Kind::fk_ball_prime: return "fk_ball_prime";
    case DomainSpec::Kind::product: return "product";
  }
  return {};
}

DomainSpec spec_from_json_unchecked(const json& j) {
  const auto kind = parse_kind(get_as<std::string>(require(j, "kind"), "kind"));
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (!params.is_object()) throw InvalidArgument("'params' must be an object");
  switch (kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: {
      double r = 1.0;
      read_optional(params, "r", r);
      return kind == DomainSpec::Kind::disc ? DomainSpec::disc(r) : DomainSpec::punctured_disc(r);
    }
    case DomainSpec::Kind::polydisc: {
      const auto n = get_as<std::size_t>(require(params, "n"), "n");
      std::vector<double> radii(n, 1.0);
      read_optional(params, "radii", radii);
      DomainSpec s;
      s.kind = kind;
      s.n = n;
      s.radii = std::move(radii);
      return s;
    }
    case DomainSpec::Kind::ball: {
      DomainSpec s;
      s.kind = kind;
      s.n = get_as<std::size_t>(require(params, "n"), "n");
      read_optional(params, "radius", s.radius);
      return s;
    }
    case DomainSpec::Kind::hartogs:
    case DomainSpec::Kind::fk_ball_prime: {
      DomainSpec s;
      s.kind = kind;
      s.k = get_as<int>(require(params, "k"), "k");
      return s;
    }
    case DomainSpec::Kind::product: {
      const json& fs = require(params, "factors");
      if (!fs.is_array()) throw InvalidArgument("'factors' must be an array");
      std::vector<DomainSpec> factors;
      for (const auto& f : fs) factors.push_back(spec_from_json_unchecked(f));
      DomainSpec s;
      s.kind = kind;
      s.factors = std::move(factors);
      s.n = 0;
      for (const auto& f : s.factors) s.n += f.dimension();
      return s;
    }
  }
  throw InvalidArgument("unknown domain kind");
}

json mass_json(const MassEstimate& m) {
  json out{{"mass", m.mass}, {"std_error", m.std_error}, {"method", "monte_carlo"}, {"sampler", m.sampler}};
  if (!m.warning.empty()) out["warning"] = m.warning;
  return out;
}

json box_json(const RatioBox& b) {
  json re = json::array(), im = json::array();
  for (const auto& iv : b.re) re.push_back({iv.lo, iv.hi});
  for (const auto& iv : b.im) im.push_back({iv.lo, iv.hi});
  return {{"re", re}, {"im", im}};
}

}  // namespace

json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {get_as<double>(j[0], "re"), get_as<double>(j[1], "im")};
  double re = 0.0, im = 0.0;
  if (!j.is_object()) throw InvalidArgument("complex number must be a number, [re, im] or {re, im}");
  read_optional(j, "re", re);
  read_optional(j, "im", im);
  return {re, im};
}

json to_json(const DomainSpec& spec) {
  json params = json::object();
  switch (spec.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: params["r"] = spec.radii.at(0); break;
    case DomainSpec::Kind::polydisc:
      params["n"] = spec.n;
      params["radii"] = spec.radii;
      break;
    case DomainSpec::Kind::ball:
      params["n"] = spec.n;
      params["radius"] = spec.radius;
      break;
    case DomainSpec::Kind::hartogs:
    case DomainSpec::Kind::fk_ball_prime: params["k"] = spec.k; break;
    case DomainSpec::Kind::product: {
      json fs = json::array();
      for (const auto& f : spec.factors) fs.push_back(to_json(f));
      params["factors"] = fs;
      break;
    }
  }
  return {{"kind", kind_name(spec.kind)}, {"params", params}};
}

DomainSpec domain_spec_from_json(const json& j) {
  DomainSpec spec = spec_from_json_unchecked(j);
  (void)make_catalog_domain(spec);
  return spec;
}

DomainSpec parse_domain_spec(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw InvalidArgument("empty domain");
  if (text[first] == '{') return domain_spec_from_json(parse_json_text(text));
  return parse_domain_label(text.substr(first));
}

json to_json(const LaurentPolynomial& f) {
  json out = json::array();
  for (const auto& [alpha, c] : f.terms()) out.push_back({{"exp", alpha}, {"re", c.real()}, {"im", c.imag()}});
  return out;
}

LaurentPolynomial laurent_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("Laurent polynomial must be a non-empty array of terms");
  LaurentPolynomial out;
  bool first = true;
  for (const auto& t : j) {
    auto alpha = get_as<MultiIndex>(require(t, "exp"), "exp");
    double re = 0.0, im = 0.0;
    read_optional(t, "re", re);
    read_optional(t, "im", im);
    if (first) {
      out = LaurentPolynomial(alpha.size());
      first = false;
    } else if (alpha.size() != out.dimension()) {
      throw InvalidArgument("Laurent terms of mixed dimension");
    }
    out.add_term(alpha, {re, im});
  }
  return out;
}

json to_json(const MonomialMap& m) {
  json exps = json::array(), coeffs = json::array();
  const auto& E = m.exponents();
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < E.cols(); ++c) row.push_back(E(i, c));
    exps.push_back(row);
  }
  for (const auto& c : m.coefficients()) coeffs.push_back(to_json(c));
  return {{"exponents", exps}, {"coefficients", coeffs}};
}

MonomialMap monomial_map_from_json(const json& j) {
  auto rows = get_as<std::vector<std::vector<int>>>(require(j, "exponents"), "exponents");
  const auto n = rows.size();
  if (n == 0) throw InvalidArgument("monomial map needs at least one row");
  Eigen::MatrixXi E(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw InvalidArgument("monomial map exponent matrix must be square");
    for (std::size_t c = 0; c < n; ++c) E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  std::vector<cplx> coeffs(n, 1.0);
  if (j.contains("coefficients")) {
    const auto& cj = j.at("coefficients");
    if (!cj.is_array() || cj.size() != n) throw InvalidArgument("one coefficient per row required");
    for (std::size_t i = 0; i < n; ++i) coeffs[i] = complex_from_json(cj[i]);
  }
  return MonomialMap(std::move(E), std::move(coeffs));
}

json to_json(const PNormResult& r) {
  json out{{"value", r.value},
           {"std_error", r.std_error},
           {"method", to_string(r.method)},
           {"p", r.p},
           {"integral", r.integral},
           {"integral_std_error", r.integral_std_error},
           {"samples_or_nodes", r.samples_or_nodes}};
  if (r.seed) out["seed"] = *r.seed;
  if (!r.warning.empty()) out["warning"] = r.warning;
  return out;
}

json to_json(const KernelEstimate& k) {
  json z = json::array();
  for (const auto& c : k.z) z.push_back(to_json(c));
  return {{"value", k.value},
          {"z", z},
          {"method", k.method},
          {"is_lower_bound", k.is_lower_bound},
          {"min_norm", k.min_norm},
          {"basis_size", k.basis.indices.size()},
          {"domain", k.basis.domain_label},
          {"p", k.basis.p},
          {"iterations", k.optimizer_report.iterations},
          {"grad_norm", k.optimizer_report.final_gradient_norm},
          {"restarts", k.optimizer_report.restarts},
          {"converged", k.optimizer_report.converged}};
}

json to_json(const IsometryVerification& v) {
  json rows = json::array();
  for (const auto& r : v.rows) {
    rows.push_back({{"test", to_json(r.test)},
                    {"source_norm", r.source_norm},
                    {"target_norm", r.target_norm},
                    {"source_std_error", r.source_std_error},
                    {"target_std_error", r.target_std_error},
                    {"relative_discrepancy", r.relative_discrepancy}});
  }
  return {{"method", to_string(v.method)}, {"max_discrepancy", v.max_discrepancy}, {"rows", rows}};
}

json to_json(const EquimeasureReport& r) {
  json rows = json::array();
  double max_z = 0.0;
  for (const auto& row : r.rows) {
    json jr{{"name", row.name},
            {"source", mass_json(row.source)},
            {"target", mass_json(row.target)},
            {"z_score", row.z_score},
            {"verdict", to_string(row.verdict)}};
    if (row.box) jr["box"] = box_json(*row.box);
    rows.push_back(jr);
    max_z = std::max(max_z, row.z_score);
  }
  return {{"rows", rows},
          {"max_z_score", max_z},
          {"verdict", to_string(r.verdict)},
          {"samples", r.samples},
          {"seed", r.seed}};
}

json to_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"citation", c.citation},
                      {"expected", c.expected},
                      {"observed", c.observed},
                      {"tolerance", c.tolerance},
                      {"verdict", c.pass ? "PASS" : "FAIL"}});
  }
  json meta = json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  return {{"label", r.label}, {"checks", checks}, {"pass", r.pass()}, {"metadata", meta}, {"notes", r.notes}};
}

Report report_from_json(const json& j) {
  Report r;
  r.label = get_as<std::string>(require(j, "label"), "label");
  const json& checks = require(j, "checks");
  if (!checks.is_array()) throw InvalidArgument("'checks' must be an array");
  for (const auto& c : checks) {
    Check ch;
    ch.name = get_as<std::string>(require(c, "name"), "name");
    read_optional(c, "citation", ch.citation);
    if (c.contains("expected")) ch.expected = c.at("expected");
    if (c.contains("observed")) ch.observed = c.at("observed");
    if (c.contains("tolerance")) ch.tolerance = c.at("tolerance");
    ch.pass = get_as<std::string>(require(c, "verdict"), "verdict") == "PASS";
    r.checks.push_back(std::move(ch));
  }
  if (j.contains("metadata") && j.at("metadata").is_object()) {
    for (const auto& [k, v] : j.at("metadata").items()) r.metadata[k] = v;
  }
  read_optional(j, "notes", r.notes);
  return r;
}

ScenarioSpec scenario_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario must be a JSON object");
  ScenarioSpec s;
  read_optional(j, "name", s.name);
  if (s.name != "counterexample" && s.name != "punctured_disc" && s.name != "roundtrip") {
    throw InvalidArgument("unknown scenario '" + s.name + "' (expected counterexample, punctured_disc or roundtrip)");
  }
  read_optional(j, "k", s.k);
  read_optional(j, "m", s.m);
  read_optional(j, "p", s.p);
  if (j.contains("a")) s.a = complex_from_json(j.at("a"));
  read_optional(j, "map", s.map);
  parse_roundtrip_map(s.map);
  read_optional(j, "seed", s.seed);
  read_optional(j, "samples", s.samples);
  if (j.contains("mutation")) s.mutation = parse_mutation(get_as<std::string>(j.at("mutation"), "mutation"));
  return s;
}

json to_json(const ScenarioSpec& s) {
  return {{"name", s.name}, {"k", s.k},       {"m", s.m},           {"p", s.p},
          {"a", to_json(s.a)}, {"map", s.map}, {"seed", s.seed}, {"samples", s.samples},
          {"mutation", to_string(s.mutation)}};
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace apiso
