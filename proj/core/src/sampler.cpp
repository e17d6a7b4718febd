#include "geoctx/sampler.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SampledQuotient sample_representatives(const QuotientGraph& q, std::uint64_t seed) {
  SampledQuotient sq;
  sq.quotient = &q;
  sq.representative_of.resize(q.size());
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < q.size(); ++s) {
    const auto& members = q.clusters.members[s];
    if (members.size() == 1) {
      sq.representative_of[s] = members.front();
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    sq.representative_of[s] = members[pick(rng)];
  }
  return sq;
}

bool RootedSubgraph::has_edge(std::size_t a, std::size_t b) const {
  const std::pair<std::uint32_t, std::uint32_t> e{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::binary_search(edges.begin(), edges.end(), e);
}

nn::Tensor2 RootedSubgraph::adjacency_matrix() const {
  const auto k = static_cast<Eigen::Index>(size());
  nn::Tensor2 a = nn::Tensor2::Zero(k, k);
  for (const auto& [i, j] : edges) a(i, j) = 1.0;
  return a;
}

RootedSubgraph bfs_subgraph(const QuotientGraph& q, std::size_t root, std::size_t n_max) {
  if (root >= q.size()) throw Error(ErrorKind::UnknownRoot, "sensor index " + std::to_string(root));
  RootedSubgraph g;
  if (n_max == 0) return g;
  std::vector<std::int32_t> local(q.size(), -1);
  std::deque<std::size_t> frontier{root};
  local[root] = 0;
  g.sensors.push_back(root);
  while (!frontier.empty() && g.sensors.size() < n_max) {
    const std::size_t s = frontier.front();
    frontier.pop_front();
    for (std::size_t nb : q.neighbors[s]) {
      if (local[nb] >= 0) continue;
      local[nb] = static_cast<std::int32_t>(g.sensors.size());
      g.sensors.push_back(nb);
      frontier.push_back(nb);
      if (g.sensors.size() == n_max) break;
    }
  }
  for (std::size_t i = 0; i < g.sensors.size(); ++i) {
    const std::size_t first = g.edges.size();
    for (std::size_t nb : q.neighbors[g.sensors[i]]) {
      if (local[nb] >= 0) g.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(local[nb]));
    }
    std::sort(g.edges.begin() + static_cast<std::ptrdiff_t>(first), g.edges.end());
  }
  return g;
}

RootedSubgraph bfs_subgraph(const SampledQuotient& sq, std::string_view root_id, std::size_t n_max) {
  const auto idx = sq.quotient->sensors.index_of(root_id);
  if (!idx) throw Error(ErrorKind::UnknownRoot, "sensor id '" + std::string(root_id) + "'");
  return bfs_subgraph(*sq.quotient, *idx, n_max);
}

PairSampler::PairSampler(const QuotientGraph& q, const RoadGraph& road,
                         std::span<const AmenityPoint> amenities, FeatureSpec spec)
    : q_(&q), spec_(std::move(spec)) {
  const FeatureExtractor extractor(road, amenities, spec_);
  FeatureMatrix raw;
  raw.features = spec_.features;
  raw.values.resize(static_cast<Eigen::Index>(road.nodes.size()),
                    static_cast<Eigen::Index>(spec_.size()));
  for (std::size_t i = 0; i < road.nodes.size(); ++i) {
    extractor.extract_row(i, raw.values.row(static_cast<Eigen::Index>(i)).data());
  }
  bounds_ = fit_scaler(raw);
  table_ = std::move(raw.values);
  apply_scaler_inplace(table_, bounds_);
}

nn::Tensor2 PairSampler::features_for(const RootedSubgraph& g, const SampledQuotient& sq) const {
  nn::Tensor2 f(static_cast<Eigen::Index>(g.size()), table_.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.row(static_cast<Eigen::Index>(i)) =
        table_.row(static_cast<Eigen::Index>(sq.representative_of[g.sensors[i]]));
  }
  return f;
}

SubgraphPair PairSampler::make_pair(std::size_t root, std::size_t n_max, std::uint64_t seed) const {
  const SampledQuotient q1 = sample_representatives(*q_, split_seed(seed, 1));
  const SampledQuotient q2 = sample_representatives(*q_, split_seed(seed, 2));
  SubgraphPair pair;
  pair.root = root;
  pair.g1 = bfs_subgraph(*q_, root, n_max);
  pair.g2 = pair.g1;
  pair.f1 = features_for(pair.g1, q1);
  pair.f2 = features_for(pair.g2, q2);
  for (std::size_t s : pair.g1.sensors) {
    pair.reps1.push_back(q1.representative_of[s]);
    pair.reps2.push_back(q2.representative_of[s]);
  }
  return pair;
}

void write_pair_dump(const SubgraphPair& pair, const PairSampler& sampler, const RoadGraph& road,
                     const std::filesystem::path& stem) {
  const auto& sensors = sampler.quotient().sensors;
  CsvTable edges;
  edges.header = {"u_sensor_id", "v_sensor_id"};
  for (const auto& [i, j] : pair.g1.edges) {
    edges.rows.push_back({sensors[pair.g1.sensors[i]].id, sensors[pair.g1.sensors[j]].id});
  }
  write_csv(stem.string() + "_edges.csv", edges);

  CsvTable feats;
  feats.header = {"view", "row", "sensor_id", "road_node_id"};
  for (Feature f : sampler.spec().features) feats.header.emplace_back(feature_name(f));
  auto emit = [&](int view, const nn::Tensor2& f, const std::vector<std::size_t>& reps) {
    for (std::size_t i = 0; i < pair.g1.size(); ++i) {
      std::vector<std::string> row{std::to_string(view), std::to_string(i),
                                   sensors[pair.g1.sensors[i]].id,
                                   std::to_string(road.nodes[reps[i]].id)};
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        row.push_back(format_double(f(static_cast<Eigen::Index>(i), j)));
      }
      feats.rows.push_back(std::move(row));
    }
  };
  emit(1, pair.f1, pair.reps1);
  emit(2, pair.f2, pair.reps2);
  write_csv(stem.string() + "_features.csv", feats);
}

}  // namespace geoctx
