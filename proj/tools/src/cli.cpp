#include "apiso/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "apiso/domain.hpp"
#include "apiso/integrate.hpp"
#include "apiso/isometry.hpp"
#include "apiso/kernel.hpp"
#include "apiso/reconstruct.hpp"
#include "apiso/rng.hpp"
#include "apiso/scenarios.hpp"
#include "apiso/serialize.hpp"

namespace apiso::cli {

using nlohmann::json;

namespace {

/// Everything a run needs besides the subcommand-specific extras.
struct RunConfig {
  std::string subcommand;
  std::string domain = "disc";
  std::string scenario;
  double p = 2.0;
  int degree = 10;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::string out;
  std::string format;
  unsigned threads = 0;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + t + "'");
  }
  if (used != t.size()) throw InvalidArgument("not a number: '" + t + "'");
  return v;
}

/// "re,im;re,im;..." with one entry per coordinate; a bare "re" has zero imaginary part.
Point parse_point(const std::string& text) {
  Point z;
  for (const auto& coord : split(text, ';')) {
    const auto parts = split(coord, ',');
    if (parts.size() == 1) {
      z.emplace_back(to_double(parts[0]), 0.0);
    } else if (parts.size() == 2) {
      z.emplace_back(to_double(parts[0]), to_double(parts[1]));
    } else {
      throw InvalidArgument("point coordinate must be 're' or 're,im': '" + coord + "'");
    }
  }
  return z;
}

/// One point per line as re_1,im_1,re_2,im_2,...; '#' comments and a header
/// line starting with a letter are skipped.
std::vector<Point> read_path_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read path file '" + path + "'");
  std::vector<Point> pts;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    const auto cells = split(line, ',');
    if (cells.size() % 2 != 0) throw InvalidArgument("path row needs re,im pairs: '" + line + "'");
    Point z;
    for (std::size_t i = 0; i < cells.size(); i += 2) z.emplace_back(to_double(cells[i]), to_double(cells[i + 1]));
    pts.push_back(std::move(z));
  }
  return pts;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Inline JSON (leading '{') or a file path.
json load_json_ref(const std::string& ref) {
  const std::string t = trim(ref);
  if (!t.empty() && t[0] == '{') return parse_json_text(t);
  return parse_json_text(read_text_file(t));
}

ScenarioSpec load_scenario(const std::string& ref, const std::string& mutate) {
  if (ref.empty()) throw InvalidArgument("--scenario is required");
  ScenarioSpec spec = scenario_from_json(load_json_ref(ref));
  if (!mutate.empty()) spec.mutation = parse_mutation(mutate);
  return spec;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split(text, ',')) {
    const std::string t = trim(s);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("not an integer: '" + t + "'");
    }
    if (used != t.size()) throw InvalidArgument("not an integer: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

NormMethod parse_method(const std::string& s) {
  if (s == "closed") return NormMethod::closed_form;
  if (s == "quad") return NormMethod::quadrature;
  if (s == "mc") return NormMethod::monte_carlo;
  throw InvalidArgument("unknown method '" + s + "' (closed|quad|mc)");
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }

  void commit() {
    if (path_.empty()) return;
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + path_ + "'");
    f << buffer_.str();
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

void write_json(const json& j, const std::string& path, std::ostream& out) {
  Output o(path, out);
  o.stream() << j.dump(2) << "\n";
  o.commit();
}

void point_header(std::ostream& os, const std::string& prefix, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    os << (j || prefix != "z" ? "," : "") << prefix << j + 1 << "_re," << prefix << j + 1 << "_im";
  }
}

void point_cells(std::ostream& os, PointView z, bool leading_comma) {
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j || leading_comma) os << ",";
    os << num(z[j].real()) << "," << num(z[j].imag());
  }
}

// ---------------------------------------------------------------------------

int run_norm(const RunConfig& cfg, const std::string& exp_text, const std::string& method_text, int nodes,
             std::ostream& out) {
  const DomainSpec spec = parse_domain_spec(cfg.domain);
  const BoundedDomain D = make_catalog_domain(spec);
  const MultiIndex alpha = parse_ints(exp_text);
  if (alpha.size() != D.dimension()) {
    throw InvalidArgument("--exp has " + std::to_string(alpha.size()) + " entries, domain dimension is " +
                          std::to_string(D.dimension()));
  }
  if (!(cfg.p > 0.0)) throw InvalidArgument("--p must be positive");
  const LaurentPolynomial f = LaurentPolynomial::monomial(alpha);
  PNormResult r;
  switch (parse_method(method_text)) {
    case NormMethod::closed_form: r = monomial_norm_closed(D, alpha, cfg.p); break;
    case NormMethod::quadrature: {
      QuadratureConfig q;
      q.radial_nodes = nodes;
      q.angular_nodes = nodes;
      r = quadrature_norm(D, f, cfg.p, q);
      break;
    }
    case NormMethod::monte_carlo: r = mc_norm(D, HoloFunction(f), cfg.p, cfg.samples, cfg.seed); break;
  }
  json j = to_json(r);
  j["domain"] = spec.label();
  j["exp"] = alpha;
  write_json(j, cfg.out, out);
  return kExitOk;
}

int run_kernel(const RunConfig& cfg, const std::vector<std::string>& z_texts, const std::string& path_file,
               const std::string& method, int min_exp, const std::string& gnuplot, std::ostream& out) {
  const DomainSpec spec = parse_domain_spec(cfg.domain);
  const BoundedDomain D = make_catalog_domain(spec);
  std::vector<Point> pts;
  for (const auto& t : z_texts) pts.push_back(parse_point(t));
  if (!path_file.empty()) {
    auto more = read_path_csv(path_file);
    pts.insert(pts.end(), more.begin(), more.end());
  }
  if (pts.empty()) throw InvalidArgument("no evaluation points (use --z or --path)");
  for (const auto& z : pts) {
    if (z.size() != D.dimension()) throw InvalidArgument("point dimension does not match the domain");
    if (!D.contains(z)) throw InvalidArgument("point outside the domain");
  }
  if (cfg.degree < 0) throw InvalidArgument("--degree must be >= 0");
  const std::string m = method == "auto" ? (cfg.p == 2.0 ? "gram" : "min_norm") : method;
  if (m != "gram" && m != "min_norm") throw InvalidArgument("unknown kernel method '" + method + "'");
  if (m == "gram" && cfg.p != 2.0) throw InvalidArgument("the gram method needs p = 2");
  const BasisSpec basis = make_basis(D, tensor_degree_indices(D.dimension(), cfg.degree, min_exp), cfg.p);

  KernelConfig kc;
  kc.seed = cfg.seed;
  std::vector<KernelEstimate> est;
  for (const auto& z : pts) {
    est.push_back(m == "gram" ? bergman2_gram(D, basis, z) : pbergman_min_norm(D, basis, z, cfg.p, kc));
  }

  const std::size_t n = D.dimension();
  Output o(cfg.out, out);
  if (cfg.format == "json") {
    json rows = json::array();
    for (const auto& e : est) rows.push_back(to_json(e));
    o.stream() << json{{"domain", spec.label()}, {"p", cfg.p}, {"degree", cfg.degree}, {"rows", rows}}.dump(2) << "\n";
  } else {
    auto& os = o.stream();
    point_header(os, "z", n);
    os << ",value,grad_norm,iterations,method,min_norm,basis_size,converged\n";
    for (const auto& e : est) {
      point_cells(os, e.z, false);
      os << "," << num(e.value) << "," << num(e.optimizer_report.final_gradient_norm) << ","
         << e.optimizer_report.iterations << "," << e.method << "," << num(e.min_norm) << ","
         << e.basis.indices.size() << "," << (e.optimizer_report.converged ? 1 : 0) << "\n";
    }
  }
  o.commit();

  if (!gnuplot.empty()) {
    std::ofstream g(gnuplot, std::ios::binary);
    if (!g) throw InvalidArgument("cannot write '" + gnuplot + "'");
    g << "# index";
    for (std::size_t j = 0; j < n; ++j) g << " z" << j + 1 << "_re z" << j + 1 << "_im";
    g << " value grad_norm\n";
    for (std::size_t i = 0; i < est.size(); ++i) {
      g << i;
      for (const auto& c : est[i].z) g << " " << num(c.real()) << " " << num(c.imag());
      g << " " << num(est[i].value) << " " << num(est[i].optimizer_report.final_gradient_norm) << "\n";
    }
  }
  return kExitOk;
}

json equimeasure_json(const CompositionIsometry& T, std::size_t boxes, std::uint64_t samples, std::uint64_t seed,
                      Verdict& verdict) {
  const FunctionFamily fam = coordinate_family(T);
  const auto bx = random_ratio_boxes(T, fam, boxes, seed);
  const EquimeasureReport rep = equimeasure_check(T, fam, bx, samples, seed);
  verdict = rep.verdict;
  return to_json(rep);
}

int run_verify_isometry(const RunConfig& cfg, const std::string& mutate, const std::string& method_text,
                        std::size_t tests, std::size_t boxes, std::ostream& out) {
  const ScenarioSpec spec = load_scenario(cfg.scenario, mutate);
  const CompositionIsometry T = scenario_operator(spec);
  const NormMethod method = parse_method(method_text);
  const auto battery = admissible_monomial_battery(T, tests, cfg.seed);

  json rows = json::array();
  double max_disc = 0.0;
  std::size_t divergent = 0;
  bool iso_pass = !battery.empty();
  for (const auto& phi : battery) {
    try {
      const auto v = verify_isometry(T, {phi}, method, cfg.samples, cfg.seed);
      const auto& r = v.rows.front();
      const double sigma = std::hypot(r.source_std_error, r.target_std_error);
      const bool ok = method == NormMethod::closed_form
                          ? r.relative_discrepancy <= 1e-9
                          : std::abs(r.target_norm - r.source_norm) <= 3.0 * sigma + 1e-9 * r.source_norm;
      iso_pass = iso_pass && ok;
      max_disc = std::max(max_disc, r.relative_discrepancy);
      rows.push_back({{"test", to_json(phi)},
                      {"source_norm", r.source_norm},
                      {"target_norm", r.target_norm},
                      {"source_std_error", r.source_std_error},
                      {"target_std_error", r.target_std_error},
                      {"relative_discrepancy", r.relative_discrepancy},
                      {"verdict", ok ? "PASS" : "FAIL"}});
    } catch (const DivergentIntegral& e) {
      ++divergent;
      iso_pass = false;
      rows.push_back({{"test", to_json(phi)}, {"divergent", e.what()}, {"verdict", "FAIL"}});
    }
  }

  Verdict eq = Verdict::pass;
  json eqj = json::object();
  if (boxes > 0) eqj = equimeasure_json(T, boxes, cfg.samples, cfg.seed, eq);
  Verdict overall = Verdict::pass;
  if (!iso_pass || eq == Verdict::fail) {
    overall = Verdict::fail;
  } else if (eq == Verdict::inconclusive) {
    overall = Verdict::inconclusive;
  }

  json j{{"scenario", to_json(spec)},
         {"method", to_string(method)},
         {"max_discrepancy", max_disc},
         {"divergent_tests", divergent},
         {"tests", rows},
         {"isometry_verdict", iso_pass ? "PASS" : "FAIL"},
         {"boxes", boxes > 0 ? eqj.at("rows") : json::array()},
         {"equimeasure_verdict", boxes > 0 ? eqj.at("verdict") : json("SKIPPED")},
         {"samples", cfg.samples},
         {"seed", cfg.seed},
         {"verdict", to_string(overall)}};
  write_json(j, cfg.out, out);
  return overall == Verdict::fail ? kExitCheckFailed : kExitOk;
}

int run_equimeasure(const RunConfig& cfg, const std::string& mutate, std::size_t boxes, std::ostream& out) {
  const ScenarioSpec spec = load_scenario(cfg.scenario, mutate);
  const CompositionIsometry T = scenario_operator(spec);
  if (boxes == 0) throw InvalidArgument("--boxes must be positive");
  Verdict v = Verdict::pass;
  json j = equimeasure_json(T, boxes, cfg.samples, cfg.seed, v);
  j["scenario"] = to_json(spec);
  write_json(j, cfg.out, out);
  return v == Verdict::fail ? kExitCheckFailed : kExitOk;
}

int run_reconstruct(const RunConfig& cfg, int grid_n, int starts, int family_degree, std::size_t max_points,
                    std::ostream& out) {
  const ScenarioSpec spec = load_scenario(cfg.scenario, "");
  const CompositionIsometry T = scenario_operator(spec);
  if (grid_n < 1) throw InvalidArgument("--grid must be >= 1");
  if (starts < 1) throw InvalidArgument("--starts must be >= 1");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("--tol must be positive");
  auto grid = grid_points(T.source().without_exclusions(), grid_n);
  if (max_points > 0 && grid.size() > max_points) {
    std::vector<Point> sub;
    const std::size_t step = grid.size() / max_points;
    for (std::size_t i = 0; i < grid.size() && sub.size() < max_points; i += step) sub.push_back(grid[i]);
    grid = std::move(sub);
  }
  if (grid.empty()) throw InvalidArgument("the grid has no points inside the source domain");

  SolverConfig sc;
  sc.tol = cfg.tol;
  sc.starts = starts;
  sc.seed = cfg.seed;
  const auto res = reconstruct_map(IsometryOracle::from(T), default_family(T, family_degree), grid, sc);

  const std::size_t n = T.source().dimension();
  const std::size_t m = T.target().dimension();
  Output o(cfg.out, out);
  auto& os = o.stream();
  point_header(os, "z", n);
  point_header(os, "w", m);
  os << ",residual,status,method,iterations,starts_used,phi0_abs\n";
  for (const auto& s : res.points) {
    point_cells(os, s.z, false);
    if (s.w.size() == m) {
      point_cells(os, s.w, true);
    } else {
      for (std::size_t j = 0; j < m; ++j) os << ",nan,nan";
    }
    os << "," << num(s.residual) << "," << to_string(s.status) << ",ratio_lm," << s.iterations << ","
       << s.starts_used << "," << num(s.phi0_abs) << "\n";
  }
  o.commit();
  return res.unresolved == 0 && res.injectivity_violations.empty() ? kExitOk : kExitCheckFailed;
}

void write_report_text(const Report& r, std::ostream& os) {
  for (const auto& c : r.checks) os << (c.pass ? "PASS " : "FAIL ") << c.name << " observed=" << c.observed.dump() << "\n";
  for (const auto& note : r.notes) os << "note: " << note << "\n";
  os << r.label << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
}

void write_report_csv(const Report& r, std::ostream& os) {
  os << "name,verdict,observed,expected,tolerance,citation\n";
  for (const auto& c : r.checks) {
    os << csv_quote(c.name) << "," << (c.pass ? "PASS" : "FAIL") << "," << csv_quote(c.observed.dump()) << ","
       << csv_quote(c.expected.dump()) << "," << csv_quote(c.tolerance.dump()) << "," << csv_quote(c.citation)
       << "\n";
  }
}

int run_scenario_cmd(const RunConfig& cfg, ScenarioSpec spec, const std::string& csv_path, std::ostream& out) {
  const Report r = run_scenario(spec);
  if (cfg.out.empty()) {
    out << to_json(r).dump(2) << "\n";
  } else {
    write_json(to_json(r), cfg.out, out);
    write_report_text(r, out);
  }
  if (!csv_path.empty()) {
    Output o(csv_path, out);
    write_report_csv(r, o.stream());
    o.commit();
  }
  return r.pass() ? kExitOk : kExitCheckFailed;
}

int run_report(const RunConfig& cfg, const std::string& file, std::ostream& out) {
  const Report r = report_from_json(load_json_ref(file));
  Output o(cfg.out, out);
  if (cfg.format == "json") {
    o.stream() << to_json(r).dump(2) << "\n";
  } else if (cfg.format == "csv") {
    write_report_csv(r, o.stream());
  } else {
    write_report_text(r, o.stream());
  }
  o.commit();
  return r.pass() ? kExitOk : kExitCheckFailed;
}

std::string single_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return trim(s);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"apiso: A^p isometry experiments", "apiso"};
  app.require_subcommand(1);
  app.set_version_flag("--version", APISO_VERSION);

  RunConfig cfg;
  app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")->capture_default_str();

  // norm
  auto* norm = app.add_subcommand("norm", "p-norm of a monomial on a catalog domain");
  std::string exp_text, method_text = "closed";
  int nodes = 0;
  norm->add_option("--domain", cfg.domain, "Domain label or JSON")->required();
  norm->add_option("--exp", exp_text, "Comma-separated exponents")->required()->allow_extra_args(false);
  norm->add_option("--p", cfg.p, "Exponent p")->required();
  norm->add_option("--method", method_text, "closed|quad|mc")->capture_default_str();
  norm->add_option("--samples", cfg.samples, "Monte Carlo proposals")->capture_default_str();
  norm->add_option("--nodes", nodes, "Quadrature nodes per variable (0 = default)");
  norm->add_option("--seed", cfg.seed)->capture_default_str();
  norm->add_option("--out", cfg.out, "Output file (default stdout)");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "p-Bergman kernel lower bounds");
  std::vector<std::string> z_texts;
  std::string path_file, kernel_method = "auto", gnuplot;
  int min_exp = 0;
  kernel->add_option("--domain", cfg.domain, "Domain label or JSON")->required();
  kernel->add_option("--p", cfg.p)->required();
  kernel->add_option("--z", z_texts, "Point as \"re,im;re,im;...\" (repeatable)")->take_all();
  kernel->add_option("--path", path_file, "CSV of points, one re,im,... row each");
  kernel->add_option("--degree", cfg.degree, "Tensor degree of the monomial basis")->capture_default_str();
  kernel->add_option("--min-exp", min_exp, "Smallest exponent per coordinate")->capture_default_str();
  kernel->add_option("--method", kernel_method, "auto|gram|min_norm")->capture_default_str();
  kernel->add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  kernel->add_option("--gnuplot", gnuplot, "Also write a whitespace-separated data file");
  kernel->add_option("--seed", cfg.seed)->capture_default_str();
  kernel->add_option("--out", cfg.out);

  // verify-isometry
  auto* verify = app.add_subcommand("verify-isometry", "Norm battery and pushforward boxes for a scenario operator");
  std::string mutate;
  std::string verify_method = "closed";
  std::size_t tests = 30, boxes = 20;
  verify->add_option("--scenario", cfg.scenario, "Scenario JSON file or inline JSON")->required();
  verify->add_option("--mutate", mutate, "Operator mutation, e.g. drop-weight");
  verify->add_option("--method", verify_method, "closed|quad|mc")->capture_default_str();
  verify->add_option("--tests", tests, "Battery size")->capture_default_str();
  verify->add_option("--boxes", boxes, "Equimeasure boxes (0 skips)")->capture_default_str();
  verify->add_option("--samples", cfg.samples)->capture_default_str();
  verify->add_option("--seed", cfg.seed)->capture_default_str();
  verify->add_option("--out", cfg.out);

  // equimeasure
  auto* equi = app.add_subcommand("equimeasure", "Pushforward mass comparison on random ratio boxes");
  equi->add_option("--scenario", cfg.scenario)->required();
  equi->add_option("--mutate", mutate);
  equi->add_option("--boxes", boxes)->capture_default_str();
  equi->add_option("--samples", cfg.samples)->capture_default_str();
  equi->add_option("--seed", cfg.seed)->capture_default_str();
  equi->add_option("--out", cfg.out);

  // reconstruct-map
  auto* recon = app.add_subcommand("reconstruct-map", "Recover the point map from the operator's action");
  int grid_n = 3, starts = 16, family_degree = 3;
  std::size_t max_points = 0;
  recon->add_option("--scenario", cfg.scenario)->required();
  recon->add_option("--grid", grid_n, "Nodes per real coordinate")->capture_default_str();
  recon->add_option("--tol", cfg.tol)->capture_default_str();
  recon->add_option("--starts", starts)->capture_default_str();
  recon->add_option("--degree", family_degree, "Family degree")->capture_default_str();
  recon->add_option("--max-points", max_points, "Evenly strided subset of the grid (0 = all)");
  recon->add_option("--seed", cfg.seed)->capture_default_str();
  recon->add_option("--out", cfg.out);

  // scenario
  auto* scen = app.add_subcommand("scenario", "Packaged scenarios");
  scen->require_subcommand(1);
  auto* scen_run = scen->add_subcommand("run", "Run a scenario and write its report");
  auto* scen_list = scen->add_subcommand("list", "List scenario names");
  ScenarioSpec sspec;
  std::string scen_file, a_text, csv_path;
  scen_run->add_option("name", sspec.name, "counterexample|punctured_disc|roundtrip");
  scen_run->add_option("--scenario", scen_file, "Scenario JSON; flags override its fields");
  auto* k_opt = scen_run->add_option("--k", sspec.k);
  auto* m_opt = scen_run->add_option("--m", sspec.m);
  auto* p_opt = scen_run->add_option("--p", sspec.p);
  auto* a_opt = scen_run->add_option("--a", a_text, "Möbius parameter \"re,im\"");
  auto* map_opt = scen_run->add_option("--map", sspec.map, "identity|mobius|unitary|f6");
  auto* seed_opt = scen_run->add_option("--seed", sspec.seed);
  auto* samples_opt = scen_run->add_option("--samples", sspec.samples);
  auto* mut_opt = scen_run->add_option("--mutate", mutate);
  scen_run->add_option("--out", cfg.out, "Report JSON path (default stdout)");
  scen_run->add_option("--csv", csv_path, "Also write the checks as CSV");

  // report
  auto* report = app.add_subcommand("report", "Summarize a report JSON");
  std::string report_file;
  report->add_option("file", report_file)->required();
  report->add_option("--format", cfg.format, "text|json|csv")->check(CLI::IsMember({"text", "json", "csv"}));
  report->add_option("--out", cfg.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion&) {
    out << APISO_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return kExitConfig;
  }

  try {
    set_worker_threads(cfg.threads);
    if (*norm) return run_norm(cfg, exp_text, method_text, nodes, out);
    if (*kernel) return run_kernel(cfg, z_texts, path_file, kernel_method, min_exp, gnuplot, out);
    if (*verify) return run_verify_isometry(cfg, mutate, verify_method, tests, boxes, out);
    if (*equi) return run_equimeasure(cfg, mutate, boxes, out);
    if (*recon) return run_reconstruct(cfg, grid_n, starts, family_degree, max_points, out);
    if (*scen_list) {
      out << "counterexample\npunctured_disc\nroundtrip\n";
      return kExitOk;
    }
    if (*scen_run) {
      ScenarioSpec spec = sspec;
      if (!scen_file.empty()) {
        spec = scenario_from_json(load_json_ref(scen_file));
        if (scen_run->count("name")) spec.name = sspec.name;
        if (*k_opt) spec.k = sspec.k;
        if (*m_opt) spec.m = sspec.m;
        if (*p_opt) spec.p = sspec.p;
        if (*map_opt) spec.map = sspec.map;
        if (*seed_opt) spec.seed = sspec.seed;
        if (*samples_opt) spec.samples = sspec.samples;
      }
      if (*a_opt) {
        const Point a = parse_point(a_text);
        if (a.size() != 1) throw InvalidArgument("--a takes a single complex number");
        spec.a = a[0];
      }
      if (*mut_opt) spec.mutation = parse_mutation(mutate);
      return run_scenario_cmd(cfg, spec, csv_path, out);
    }
    if (*report) return run_report(cfg, report_file, out);
  } catch (const std::exception& e) {
    err << "error: " << single_line(e.what()) << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace apiso::cli
