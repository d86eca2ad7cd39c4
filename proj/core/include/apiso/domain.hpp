#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apiso/types.hpp"

namespace apiso {

/// Region of moduli (|z_1|, ..., |z_n|) describing a Reinhardt domain.
struct RadialProfile {
  enum class Kind {
    polydisc,           ///< r_j < radii[j]
    ball,               ///< |r| < radius, dimension n
    hartogs_graph,      ///< r_2 < r_1^k < 1
    graph_with_factor,  ///< r_2 < r_1^k sqrt(1 - r_1^2)
    product,
  };

  Kind kind = Kind::polydisc;
  std::vector<double> radii;  // polydisc
  std::size_t n = 1;          // ball
  double radius = 1.0;        // ball
  int k = 1;                  // graph kinds
  std::vector<RadialProfile> factors;

  std::size_t dimension() const;
  /// Strict-inequality membership of a modulus vector.
  bool contains(std::span<const double> moduli) const;
};

/// Catalog descriptor of the concrete domains the tool knows about.
struct DomainSpec {
  enum class Kind { disc, punctured_disc, polydisc, ball, hartogs, fk_ball_prime, product };

  Kind kind = Kind::disc;
  std::size_t n = 1;
  std::vector<double> radii;  // disc/punctured_disc: radii[0]; polydisc: per coordinate
  double radius = 1.0;        // ball
  int k = 1;
  std::vector<DomainSpec> factors;

  static DomainSpec disc(double r = 1.0);
  static DomainSpec punctured_disc(double r = 1.0);
  static DomainSpec polydisc(std::size_t n, std::vector<double> radii);
  static DomainSpec ball(std::size_t n, double radius = 1.0);
  static DomainSpec hartogs(int k);
  static DomainSpec fk_ball_prime(int k);
  static DomainSpec product(std::vector<DomainSpec> factors);

  std::size_t dimension() const;
  /// Stable identifier, e.g. "ball(2)*hartogs(3)".
  std::string label() const;
  /// Factors of a product flattened to non-product entries.
  std::vector<DomainSpec> flatten() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Axis-aligned box in real coordinates, one (re, im) rectangle per complex coordinate.
struct BoundingBox {
  std::vector<Interval> re;
  std::vector<Interval> im;

  double volume() const;
  double diameter() const;
  bool contains(PointView z) const;
};

class BoundedDomain {
 public:
  using Membership = std::function<bool(PointView)>;

  /// A domain given only by a membership predicate.
  BoundedDomain(std::size_t dimension, Membership membership, BoundingBox box, std::string label);

  std::size_t dimension() const { return dimension_; }
  bool contains(PointView z) const;
  const BoundingBox& bounding_box() const { return box_; }
  const std::vector<std::size_t>& null_exclusions() const { return exclusions_; }
  const std::optional<RadialProfile>& radial_profile() const { return profile_; }
  const std::optional<DomainSpec>& spec() const { return spec_; }
  const std::string& label() const { return label_; }

  /// The same domain with the coordinate hyperplanes {z_j = 0} removed.
  BoundedDomain with_exclusions(std::vector<std::size_t> coordinates) const;
  /// The parent domain with all null exclusions dropped.
  BoundedDomain without_exclusions() const;

 private:
  friend BoundedDomain make_catalog_domain(const DomainSpec& spec);
  BoundedDomain() = default;

  std::size_t dimension_ = 0;
  Membership membership_;
  BoundingBox box_;
  std::vector<std::size_t> exclusions_;
  std::optional<RadialProfile> profile_;
  std::optional<DomainSpec> spec_;
  std::string label_;
};

BoundedDomain make_catalog_domain(const DomainSpec& spec);

/// Parses a label such as "disc", "disc(2)", "polydisc(2,1,0.5)" or "ball(2)*hartogs(3)".
DomainSpec parse_domain_label(std::string_view text);

/// Accepts either a label or a JSON object {"kind": ..., "params": {...}}.
DomainSpec parse_domain_spec(std::string_view text);

struct BoundaryDistance {
  double distance = 0.0;
  /// True when the query point is a member (distance is to the boundary);
  /// false when it is outside (distance is to the domain).
  bool inside = false;
};

BoundaryDistance boundary_distance(const BoundedDomain& domain, PointView w, double tol);

struct SampleStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

struct SampleSet {
  std::vector<Point> points;
  SampleStats stats;
};

/// Uniform samples by rejection from the bounding box. Deterministic in
/// (seed, count) regardless of the worker count.
SampleSet sample(const BoundedDomain& domain, std::uint64_t seed, std::size_t count);

struct ClosureProbeReport {
  bool violation_found = false;
  std::vector<Point> witnesses;
  std::size_t points_checked = 0;
  double resolution = 0.0;
  std::string verdict() const;
};

/// Looks for non-members whose whole neighbourhood at the given resolution
/// lies in the domain, i.e. points of int(closure(D)) \ D. A finite-resolution
/// falsification probe, never a certificate.
ClosureProbeReport interior_closure_probe(const BoundedDomain& domain, double resolution);

/// Members of a tensor grid with n_per_dim nodes per real coordinate
/// (odd counts include the coordinate hyperplanes through 0).
std::vector<Point> grid_points(const BoundedDomain& domain, int n_per_dim);

}  // namespace apiso
