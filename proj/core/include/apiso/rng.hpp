#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace apiso {

/// Stream tags keep the substreams of different operations disjoint even
/// when they share a user seed.
enum class StreamTag : std::uint64_t {
  sampler = 1,
  mc_norm = 2,
  pushforward_source = 3,
  pushforward_target = 4,
  box_pilot = 5,
  solver_starts = 6,
  kernel_restarts = 7,
  probe_directions = 8,
  test_points = 9,
};

/// A reproducible random stream identified by (seed, tag, index).
///
/// The engine is std::mt19937_64 seeded through std::seed_seq, both of which
/// are fully specified by the standard, and uniform variates are built from
/// raw engine bits, so a stream yields the same sequence on every platform.
/// Gamma variates go through std::gamma_distribution and are reproducible
/// for a given standard library.
class Stream {
 public:
  Stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }
  double normal();
  double gamma(double shape);
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
};

/// Number of worker threads used by parallel loops (0 = hardware).
unsigned worker_threads();
void set_worker_threads(unsigned threads);

/// Runs body(i) for i in [0, count) on up to worker_threads() threads.
/// Callers must write results into per-index slots so that the outcome does
/// not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace apiso
