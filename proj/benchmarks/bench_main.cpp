#include <benchmark/benchmark.h>

#include <map>

#include "geoctx/encoder.hpp"
#include "geoctx/features.hpp"
#include "geoctx/pipeline.hpp"
#include "geoctx/sampler.hpp"
#include "geoctx/synthetic_city.hpp"

namespace {

using namespace geoctx;

const SyntheticCity& city(std::size_t sensors) {
  static std::map<std::size_t, SyntheticCity> cache;
  auto it = cache.find(sensors);
  if (it == cache.end()) {
    CityParams p;
    p.n_sensors = sensors;
    p.days = 0;
    it = cache.emplace(sensors, generate_city(p)).first;
  }
  return it->second;
}

void BM_Quotient(benchmark::State& state) {
  const auto& c = city(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_traffic_graph(c.road, c.sensors, 0.01));
  }
  state.SetComplexityN(static_cast<std::int64_t>(c.road.nodes.size() + c.road.edges.size()));
}
BENCHMARK(BM_Quotient)->RangeMultiplier(2)->Range(50, 400)->Complexity();

void BM_Features(benchmark::State& state) {
  const auto& c = city(200);
  std::vector<std::int64_t> ids;
  for (const auto& n : c.road.nodes) ids.push_back(n.id);
  const FeatureExtractor ex(c.road, c.amenities, FeatureSpec::first_n(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ex.extract(ids));
  }
}
BENCHMARK(BM_Features)->DenseRange(1, 5);

void BM_PairGeneration(benchmark::State& state) {
  const auto& c = city(120);
  const auto q = build_traffic_graph(c.road, c.sensors, 0.01);
  const PairSampler sampler(q, c.road, c.amenities, FeatureSpec{});
  const auto n_max = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.make_pair(seed % q.size(), n_max, seed));
    ++seed;
  }
}
BENCHMARK(BM_PairGeneration)->Arg(16)->Arg(64)->Arg(static_cast<std::int64_t>(1) << 20);

void BM_EncoderForward(benchmark::State& state) {
  const auto& c = city(120);
  const auto q = build_traffic_graph(c.road, c.sensors, 0.01);
  const PairSampler sampler(q, c.road, c.amenities, FeatureSpec{});
  EncoderConfig cfg;
  cfg.hidden_dim = static_cast<std::size_t>(state.range(0));
  const GeometricEncoder enc(cfg, 1);
  const auto pair = sampler.make_pair(0, 64, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(enc.embed(pair.g1, pair.f1));
  }
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(320);

}  // namespace

BENCHMARK_MAIN();
