#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apiso/cli.hpp"
#include "apiso/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = apiso::cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "apiso_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("norm prints a JSON result") {
  const auto r = run({"norm", "--domain", "disc", "--exp", "-1", "--p", "1", "--method", "closed"});
  REQUIRE(r.code == apiso::cli::kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(2.0 * 3.141592653589793).epsilon(1e-14));
  CHECK(j["method"] == "closed_form");
  const auto q = run({"norm", "--domain", "ball(2)", "--exp", "1,0", "--p", "3", "--method", "quad"});
  REQUIRE(q.code == 0);
  CHECK(json::parse(q.out)["method"] == "quadrature");
}

TEST_CASE("configuration errors exit 2 with one diagnostic line") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"norm", "--domain", "annulus", "--exp", "0", "--p", "1"},
           {"norm", "--domain", "disc", "--exp", "0", "--p", "1", "--bogus"},
           {"verify-isometry", "--scenario", "{\"name\": "},
           {"scenario", "run", "counterexample", "--k", "1", "--m", "1"},
           {"kernel", "--domain", "punctured_disc", "--p", "2", "--min-exp", "-1", "--z", "0.5,0"},
           {"report", "/nonexistent/report.json"},
           {"frobnicate"}}) {
    const auto r = run(args);
    CHECK_MESSAGE(r.code == apiso::cli::kExitConfig, args[0]);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(lines(r.err) == 1);
  }
  const auto even = run({"scenario", "run", "counterexample", "--k", "1", "--m", "1"});
  CHECK(even.err.find("even integer") != std::string::npos);
}

TEST_CASE("kernel CSV, JSON and gnuplot outputs") {
  const auto r = run({"kernel", "--domain", "disc", "--p", "2", "--z", "0,0", "--z", "0.5,0", "--degree", "20"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(header == "z1_re,z1_im,value,grad_norm,iterations,method,min_norm,basis_size,converged");
  CHECK(std::stod(row0.substr(row0.find(',', row0.find(',') + 1) + 1)) ==
        doctest::Approx(1.0 / 3.141592653589793).epsilon(1e-12));
  CHECK(row1.find("gram") != std::string::npos);

  const fs::path gp = scratch("kernel.dat");
  const auto j = run({"kernel", "--domain", "ball(2)", "--p", "1", "--z", "0.1,0;0.2,0", "--degree", "2", "--format",
                      "json", "--gnuplot", gp.string()});
  REQUIRE(j.code == 0);
  const json parsed = json::parse(j.out);
  REQUIRE(parsed["rows"].size() == 1);
  CHECK(parsed["rows"][0]["method"] == "min_norm");
  CHECK(parsed["rows"][0]["is_lower_bound"] == true);
  const std::string dat = slurp(gp);
  CHECK(dat.rfind("# index z1_re z1_im z2_re z2_im value grad_norm", 0) == 0);
  CHECK(lines(dat) == 2);
}

TEST_CASE("verify-isometry passes, and the drop-weight mutation exits 1") {
  const std::string sc = R"({"name": "counterexample", "k": 3, "m": 2})";
  const auto ok = run({"verify-isometry", "--scenario", sc, "--boxes", "0"});
  REQUIRE(ok.code == apiso::cli::kExitOk);
  const json j = json::parse(ok.out);
  CHECK(j["verdict"] == "PASS");
  CHECK(j["max_discrepancy"].get<double>() < 1e-9);
  CHECK(j["tests"].size() == 30);

  const auto bad = run({"verify-isometry", "--scenario", sc, "--boxes", "0", "--mutate", "drop-weight"});
  CHECK(bad.code == apiso::cli::kExitCheckFailed);
  CHECK(json::parse(bad.out)["verdict"] == "FAIL");

  const fs::path file = scratch("scenario.json");
  std::ofstream(file) << sc;
  CHECK(run({"verify-isometry", "--scenario", file.string(), "--boxes", "0", "--tests", "5"}).code == 0);
}

TEST_CASE("reconstruct-map CSV") {
  const std::string sc = R"({"name": "roundtrip", "map": "mobius", "a": [0.3, 0], "p": 1})";
  const auto r = run({"reconstruct-map", "--scenario", sc, "--grid", "4"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "z1_re,z1_im,w1_re,w1_im,residual,status,method,iterations,starts_used,phi0_abs");
  CHECK(lines(r.out) > 5);
  CHECK(r.out.find("unresolved") == std::string::npos);
}

TEST_CASE("scenario run writes a report, and report re-reads it") {
  const fs::path out = scratch("punctured.json");
  const fs::path csv = scratch("punctured.csv");
  const auto r = run({"scenario", "run", "punctured_disc", "--p", "1", "--out", out.string(), "--csv", csv.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PASS inverse_z_norm") != std::string::npos);
  const json rep = json::parse(slurp(out));
  CHECK(rep["pass"] == true);
  CHECK(slurp(csv).rfind("name,", 0) == 0);

  const auto text = run({"report", out.string()});
  CHECK(text.code == 0);
  CHECK(text.out.find("PASS") != std::string::npos);
  const auto as_json = run({"report", out.string(), "--format", "json"});
  CHECK(json::parse(as_json.out)["pass"] == true);

  const auto failing = run({"scenario", "run", "punctured_disc", "--p", "2", "--mutate", "shifted_radius"});
  CHECK(failing.code == apiso::cli::kExitCheckFailed);
  CHECK(json::parse(failing.out)["pass"] == false);

  const auto list = run({"scenario", "list"});
  CHECK(list.code == 0);
  CHECK(list.out.find("counterexample") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  const std::vector<std::string> args{"equimeasure", "--scenario", R"({"name": "counterexample", "k": 2, "m": 3})",
                                      "--boxes", "4", "--samples", "100000", "--seed", "9"};
  const auto a = run(args);
  std::vector<std::string> threaded{"--threads", "3"};
  threaded.insert(threaded.end(), args.begin(), args.end());
  const auto b = run(threaded);
  apiso::set_worker_threads(0);
  const auto c = run(args);
  REQUIRE(a.code != apiso::cli::kExitConfig);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("help and version") {
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("verify-isometry") != std::string::npos);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK_FALSE(v.out.empty());
}
