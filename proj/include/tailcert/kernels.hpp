#pragma once

// Hot loops, each in an OpenMP version and a plain serial reference that the
// tests compare against.  Results never depend on the worker count: work is
// split into fixed blocks, every block draws from its own random substream,
// and reductions are order-independent (max) or done in block order.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailcert/kdtree.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

/// Sets the OpenMP thread count used by the parallel kernels; 0 restores the
/// runtime default.
void set_worker_count(int workers);
int worker_count();

/// Replicates per random substream.
inline constexpr std::size_t kReplicateBlock = 1024;

/// out[i] = fn(rng, i) where rng is the substream of i's block, advanced past
/// the earlier replicates of that block.
template <class Fn>
std::vector<double> run_replicates_serial(std::size_t m, std::uint64_t seed, Fn&& fn) {
  std::vector<double> out(m);
  const std::size_t blocks = (m + kReplicateBlock - 1) / kReplicateBlock;
  for (std::size_t b = 0; b < blocks; ++b) {
    Rng rng(seed, b);
    const std::size_t end = std::min(m, (b + 1) * kReplicateBlock);
    for (std::size_t i = b * kReplicateBlock; i < end; ++i) out[i] = fn(rng, i);
  }
  return out;
}

template <class Fn>
std::vector<double> run_replicates(std::size_t m, std::uint64_t seed, Fn&& fn) {
  std::vector<double> out(m);
  const long blocks = static_cast<long>((m + kReplicateBlock - 1) / kReplicateBlock);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (long b = 0; b < blocks; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    const std::size_t end = std::min(m, static_cast<std::size_t>(b + 1) * kReplicateBlock);
    for (std::size_t i = static_cast<std::size_t>(b) * kReplicateBlock; i < end; ++i) out[i] = fn(rng, i);
  }
  return out;
}

/// max over probes of the distance to the nearest point (brute force).
double max_nearest_distance_serial(const std::vector<double>& points, const std::vector<double>& probes, int dim);
/// Same quantity through a k-d tree, probes split across workers.
double max_nearest_distance(const KdTree& tree, const std::vector<double>& probes);

/// counts[j] = #{i : values[i] >= thresholds[j]} by direct scanning.
std::vector<std::uint64_t> count_at_least_serial(const std::vector<double>& values,
                                                 const std::vector<double>& thresholds);
/// Same counts from one sort and binary searches, thresholds across workers.
std::vector<std::uint64_t> count_at_least(std::vector<double> values, const std::vector<double>& thresholds);

}  // namespace tailcert
