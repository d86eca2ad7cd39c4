#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apiso/isometry.hpp"

namespace apiso {

struct Check {
  std::string name;
  std::string citation;
  nlohmann::json expected;
  nlohmann::json observed;
  nlohmann::json tolerance;
  bool pass = false;
};

struct Report {
  std::string label;
  std::vector<Check> checks;
  std::map<std::string, nlohmann::json> metadata;
  std::vector<std::string> notes;

  /// True iff every check passed (and there is at least one).
  bool pass() const;
  const Check* find(const std::string& name) const;
};

enum class Mutation { none, weight_exponent_plus_one, drop_weight, drop_jacobian, wrong_weight, shifted_radius };
std::string to_string(Mutation m);
Mutation parse_mutation(const std::string& s);

struct CounterexampleOptions {
  std::uint64_t seed = 0;
  std::uint64_t equimeasure_samples = 1'000'000;
  std::size_t equimeasure_boxes = 20;
  std::size_t reconstruction_points = 100;
  Mutation mutation = Mutation::none;
};

/// Checks (a)-(i) for the operator between ball(2) x hartogs(k) and
/// fk_ball_prime(k) x polydisc(2) with p = 2k/m. Throws PreconditionError
/// when 2k/m is an even integer.
Report counterexample_scenario(int k, int m, const CounterexampleOptions& opt = {});

/// Restriction from the disc to the punctured disc (p = 2) and the function
/// 1/z in A^1 of the punctured disc (p = 1).
Report punctured_disc_scenario(double p, Mutation mutation = Mutation::none, std::uint64_t seed = 0);

enum class RoundtripMap { identity, mobius, unitary, f6 };
std::string to_string(RoundtripMap m);
RoundtripMap parse_roundtrip_map(const std::string& s);

struct RoundtripOptions {
  RoundtripMap map = RoundtripMap::mobius;
  double p = 1.0;
  cplx a = 0.3;  ///< Möbius parameter
  std::uint64_t seed = 0;
  std::size_t grid_points = 24;
  Mutation mutation = Mutation::none;
};

/// Builds T from a packaged map, reconstructs F and checks that
/// T(phi)(F(z)) J_F(z)^{2/p} / phi(z) is one unimodular constant.
Report roundtrip_scenario(const RoundtripOptions& opt);

/// Scenario file / CLI description.
struct ScenarioSpec {
  std::string name = "counterexample";  ///< counterexample | punctured_disc | roundtrip
  int k = 3;
  int m = 2;
  double p = 1.0;
  cplx a = 0.3;
  std::string map = "mobius";
  std::uint64_t seed = 0;
  std::uint64_t samples = 1'000'000;
  Mutation mutation = Mutation::none;
};

Report run_scenario(const ScenarioSpec& spec);

/// The operator a scenario is built around (with its mutation applied).
CompositionIsometry scenario_operator(const ScenarioSpec& spec);

}  // namespace apiso
