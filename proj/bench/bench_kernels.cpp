// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cmath>

#include "tailcert/kernels.hpp"
#include "tailcert/nets.hpp"

using namespace tailcert;

namespace {

const Net& sphere_net() {
  static const Net net = build_net(MetricSpaceSpec::sphere(3), 0.25, 7);
  return net;
}

const std::vector<double>& probes() {
  static const auto p = sample_space(MetricSpaceSpec::sphere(3), 20000, 11);
  return p;
}

void BM_NearestSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(max_nearest_distance_serial(sphere_net().points, probes(), 3));
}

void BM_NearestParallel(benchmark::State& st) {
  set_worker_count(static_cast<int>(st.range(0)));
  const KdTree tree(sphere_net().points, 3);
  for (auto _ : st) benchmark::DoNotOptimize(max_nearest_distance(tree, probes()));
  set_worker_count(0);
}

std::vector<double> values(std::size_t m) {
  return run_replicates_serial(m, 3, [](Rng& r, std::size_t) { return std::abs(r.normal()); });
}

void BM_CountSerial(benchmark::State& st) {
  const auto v = values(200000);
  std::vector<double> t;
  for (int i = 0; i < 64; ++i) t.push_back(0.1 * i);
  for (auto _ : st) benchmark::DoNotOptimize(count_at_least_serial(v, t));
}

void BM_CountParallel(benchmark::State& st) {
  set_worker_count(static_cast<int>(st.range(0)));
  const auto v = values(200000);
  std::vector<double> t;
  for (int i = 0; i < 64; ++i) t.push_back(0.1 * i);
  for (auto _ : st) benchmark::DoNotOptimize(count_at_least(v, t));
  set_worker_count(0);
}

double replicate(Rng& r, std::size_t) {
  double s = 0.0;
  for (int k = 0; k < 256; ++k) s += r.normal();
  return std::abs(s);
}

void BM_ReplicatesSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(run_replicates_serial(1 << 14, 5, replicate));
}

void BM_ReplicatesParallel(benchmark::State& st) {
  set_worker_count(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(run_replicates(1 << 14, 5, replicate));
  set_worker_count(0);
}

}  // namespace

BENCHMARK(BM_NearestSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicatesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicatesParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
