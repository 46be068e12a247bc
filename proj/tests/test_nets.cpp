#include <doctest.h>

#include <cmath>

#include "tailcert/error.hpp"
#include "tailcert/kdtree.hpp"
#include "tailcert/lattice.hpp"
#include "tailcert/nets.hpp"

using namespace tailcert;

TEST_CASE("the 0-sphere is two points") {
  const auto net = build_net(MetricSpaceSpec::sphere(1), 0.5, 1);
  CHECK(net.size() == 2);
  CHECK(verify_covering(net, 1000, 2, 0.0).pass);
}

TEST_CASE("greedy circle net at eps = 1/2") {
  const auto space = MetricSpaceSpec::sphere(2);
  const auto net = build_net(space, 0.5, 7);
  // A maximal 1/2-separated set on the circle has between 7 and 12 points.
  CHECK(net.size() >= 7);
  CHECK(net.size() <= 12);
  CHECK(net.size() <= space.cardinality_bound(0.5));
  CHECK(space.cardinality_bound(0.5) == doctest::Approx(25.0));
  CHECK(min_pairwise_distance(net) > 0.5);
  CHECK(verify_covering(net, 100000, 3, 0.05).pass);
}

TEST_CASE("greedy ball net stays under the volume bound") {
  const auto space = MetricSpaceSpec::ball(3);
  const auto net = build_net(space, 0.5, 1);
  CHECK(net.size() <= 125);
  CHECK(min_pairwise_distance(net) > 0.5);
  CHECK(verify_covering(net, 100000, 4, 0.05).pass);
}

TEST_CASE("angular lattice on the circle and a damaged copy") {
  NetOptions opt;
  opt.strategy = NetStrategy::AngularLattice;
  auto net = build_net(MetricSpaceSpec::sphere(2), 0.5, 0, opt);
  CHECK(net.size() == 13);
  CHECK(verify_covering(net, 100000, 5, 0.0).pass);
  // Dropping a contiguous half leaves an arc far from every point.
  std::vector<double> kept;
  for (std::size_t i = 0; i < net.size() / 2; ++i) kept.insert(kept.end(), net.point(i), net.point(i) + 2);
  net.points = kept;
  CHECK_FALSE(verify_covering(net, 100000, 5, 0.0).pass);
}

TEST_CASE("lattice shell nets cover the sphere") {
  NetOptions opt;
  opt.strategy = NetStrategy::LatticeShell;
  for (int d : {3, 4, 8}) {
    const auto net = build_net(MetricSpaceSpec::sphere(d), 0.5, 0, opt);
    CHECK(verify_covering(net, 20000, 6, 0.05).pass);
  }
  CHECK_THROWS_AS(build_net(MetricSpaceSpec::sphere(3), 1.9, 0, opt), Error);
}

TEST_CASE("lattice nearest point is the closest of its neighbours") {
  for (int d : {2, 4, 8}) {
    const auto kind = preferred_lattice(d);
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i) x[i] = 0.37 * (i + 1) - 0.9;
    const auto p = nearest_lattice_point(kind, x);
    CHECK(std::sqrt(dist2(x.data(), p.data(), d)) <= covering_radius(kind, d) + 1e-12);
  }
}

TEST_CASE("product nets combine radii in quadrature") {
  const auto a = build_net(MetricSpaceSpec::sphere(2), 0.5, 1);
  const auto b = build_net(MetricSpaceSpec::ball(1), 0.25, 2);
  const auto p = product_net({a, b});
  CHECK(p.size() == a.size() * b.size());
  CHECK(p.epsilon == doctest::Approx(std::sqrt(0.25 + 0.0625)));
  CHECK(p.dim() == 3);
  CHECK(verify_covering(p, 20000, 8, 0.05).pass);
}

TEST_CASE("nets are deterministic in the seed") {
  const auto space = MetricSpaceSpec::sphere(3);
  const auto a = build_net(space, 0.4, 11), b = build_net(space, 0.4, 11), c = build_net(space, 0.4, 12);
  CHECK(net_digest(a) == net_digest(b));
  CHECK(net_digest(a) != net_digest(c));
}

TEST_CASE("invalid nets") {
  CHECK_THROWS_AS(build_net(MetricSpaceSpec::sphere(2), 0.0, 1), Error);
  CHECK_THROWS_AS(build_net(MetricSpaceSpec::sphere(2), 3.0, 1), Error);
  NetOptions opt;
  opt.point_cap = 10;
  try {
    build_net(MetricSpaceSpec::sphere(4), 0.2, 1, opt);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("csv export: header, column names, one row per point") {
  const auto net = build_net(MetricSpaceSpec::sphere(2), 0.5, 1);
  const auto csv = net_to_csv(net);
  CHECK(csv.rfind("#", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == net.size() + 2);
  CHECK(space_from_json(to_json(MetricSpaceSpec::product({MetricSpaceSpec::sphere(2), MetricSpaceSpec::ball(2)})))
            .ambient_dim() == 4);
}
