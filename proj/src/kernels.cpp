#include "tailcert/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace tailcert {

namespace {
int g_workers = 0;
}

void set_worker_count(int workers) { g_workers = std::max(0, workers); }

int worker_count() { return g_workers > 0 ? g_workers : omp_get_max_threads(); }

double max_nearest_distance_serial(const std::vector<double>& points, const std::vector<double>& probes, int dim) {
  const std::size_t np = points.size() / dim, nq = probes.size() / dim;
  double worst = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < np; ++i) best = std::min(best, dist2(points.data() + i * dim, probes.data() + q * dim, dim));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double max_nearest_distance(const KdTree& tree, const std::vector<double>& probes) {
  const int dim = tree.dim();
  const long nq = static_cast<long>(probes.size() / dim);
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static) num_threads(worker_count())
  for (long q = 0; q < nq; ++q) {
    worst = std::max(worst, tree.nearest(probes.data() + q * dim).dist2);
  }
  return std::sqrt(worst);
}

std::vector<std::uint64_t> count_at_least_serial(const std::vector<double>& values,
                                                 const std::vector<double>& thresholds) {
  std::vector<std::uint64_t> out(thresholds.size(), 0);
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    for (double v : values) out[j] += v >= thresholds[j];
  }
  return out;
}

std::vector<std::uint64_t> count_at_least(std::vector<double> values, const std::vector<double>& thresholds) {
  std::sort(values.begin(), values.end());
  std::vector<std::uint64_t> out(thresholds.size(), 0);
  const long nt = static_cast<long>(thresholds.size());
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long j = 0; j < nt; ++j) {
    auto it = std::lower_bound(values.begin(), values.end(), thresholds[j]);
    out[j] = static_cast<std::uint64_t>(values.end() - it);
  }
  return out;
}

}  // namespace tailcert
