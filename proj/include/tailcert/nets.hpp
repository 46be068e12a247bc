#pragma once

// epsilon-nets of spheres, balls and their Euclidean products.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailcert/sequences.hpp"

namespace tailcert {

struct MetricSpaceSpec {
  enum class Kind { Sphere, Ball, Product };
  Kind kind = Kind::Sphere;
  int d = 2;            // ambient dimension: Sphere(d) is the unit sphere in R^d
  double radius = 1.0;  // Ball only
  std::vector<MetricSpaceSpec> parts;

  static MetricSpaceSpec sphere(int d);
  static MetricSpaceSpec ball(int d, double radius = 1.0);
  static MetricSpaceSpec product(std::vector<MetricSpaceSpec> parts);

  int ambient_dim() const;
  double diameter() const;
  /// (1 + 2R/eps)^d for spheres and balls, the product of the part bounds at
  /// eps / sqrt(#parts) for products.
  double cardinality_bound(double eps) const;
  std::string describe() const;
};

enum class NetStrategy { GreedyPacking, AngularLattice, LatticeShell, Product };

std::string to_string(NetStrategy s);
NetStrategy net_strategy_from_string(const std::string& s);

struct CoverageReport {
  std::uint64_t probe_count = 0;
  double max_probe_distance = 0.0;
  std::uint64_t probe_seed = 0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Net {
  MetricSpaceSpec space;
  double epsilon = 0.0;
  std::vector<double> points;  // row-major, space.ambient_dim() columns
  NetStrategy strategy = NetStrategy::GreedyPacking;
  std::uint64_t seed = 0;
  std::uint64_t proposals = 0;  // greedy only
  std::optional<CoverageReport> verification;

  int dim() const { return space.ambient_dim(); }
  std::size_t size() const { return points.size() / dim(); }
  const double* point(std::size_t i) const { return points.data() + i * dim(); }
};

struct NetOptions {
  NetStrategy strategy = NetStrategy::GreedyPacking;
  /// Greedy stops after streak_factor * |net| consecutive rejections.
  double streak_factor = 1e4;
  /// Greedy gives up (BudgetExceeded) beyond this many points.
  std::size_t point_cap = 200000;
};

Net build_net(const MetricSpaceSpec& space, double epsilon, std::uint64_t seed, const NetOptions& options = {});

/// Uniform probe points in the space.
std::vector<double> sample_space(const MetricSpaceSpec& space, std::size_t count, std::uint64_t seed);

CoverageReport verify_covering(const Net& net, std::uint64_t probe_count, std::uint64_t seed, double tolerance);

/// Cartesian product; the covering radius is sqrt(sum eps_i^2).
Net product_net(const std::vector<Net>& nets);

/// Smallest pairwise distance (exact, quadratic).
double min_pairwise_distance(const Net& net);

json to_json(const MetricSpaceSpec& s);
MetricSpaceSpec space_from_json(const json& j);
json net_header(const Net& net);
/// Header as '#'-prefixed JSON on the first line, then one CSV row per point.
std::string net_to_csv(const Net& net);
std::string net_digest(const Net& net);

}  // namespace tailcert
