#include <doctest.h>

#include <cmath>

#include "tailcert/kernels.hpp"

using namespace tailcert;

namespace {

std::vector<double> uniform_cloud(std::size_t n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n * dim);
  for (auto& x : v) x = 2 * rng.uniform() - 1;
  return v;
}

}  // namespace

TEST_CASE("replicates do not depend on the worker count") {
  auto fn = [](Rng& rng, std::size_t i) { return rng.normal() + 1e-3 * static_cast<double>(i); };
  const auto ref = run_replicates_serial(5000, 42, fn);
  for (int w : {1, 2, 4}) {
    set_worker_count(w);
    CHECK(run_replicates(5000, 42, fn) == ref);
  }
  set_worker_count(0);
}

TEST_CASE("nearest-distance kernel matches brute force") {
  for (int dim : {2, 5}) {
    const auto pts = uniform_cloud(300, dim, 1);
    const auto probes = uniform_cloud(2000, dim, 2);
    const double ref = max_nearest_distance_serial(pts, probes, dim);
    const KdTree tree(pts, dim);
    for (int w : {1, 2, 4}) {
      set_worker_count(w);
      CHECK(max_nearest_distance(tree, probes) == ref);
    }
  }
  set_worker_count(0);
}

TEST_CASE("threshold counts match direct scanning") {
  const auto values = uniform_cloud(10000, 1, 3);
  std::vector<double> th;
  for (int i = 0; i <= 40; ++i) th.push_back(-1.0 + 0.05 * i);
  th.push_back(values[17]);  // exact tie
  const auto ref = count_at_least_serial(values, th);
  for (int w : {1, 2, 4}) {
    set_worker_count(w);
    CHECK(count_at_least(values, th) == ref);
  }
  set_worker_count(0);
}

TEST_CASE("k-d tree radius queries") {
  const auto pts = uniform_cloud(500, 3, 9);
  const KdTree tree(pts, 3);
  const auto probes = uniform_cloud(200, 3, 10);
  for (std::size_t i = 0; i < 200; ++i) {
    const double* q = probes.data() + 3 * i;
    const auto hit = tree.nearest(q);
    const double d = std::sqrt(hit.dist2);
    CHECK(tree.any_within(q, d * (1 + 1e-12)));
    CHECK_FALSE(tree.any_within(q, d * (1 - 1e-9)));
  }
}
