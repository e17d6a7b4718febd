#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "geoctx/features.hpp"
#include "geoctx/nn/tensor.hpp"
#include "geoctx/quotient.hpp"

namespace geoctx {

// SplitMix64 finaliser; derives independent RNG streams from (seed, stream).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

// One road node per sensor cluster. Topology is the parent quotient's.
struct SampledQuotient {
  const QuotientGraph* quotient = nullptr;
  std::vector<std::size_t> representative_of;  // sensor -> road node position

  friend bool operator==(const SampledQuotient& a, const SampledQuotient& b) {
    return a.quotient == b.quotient && a.representative_of == b.representative_of;
  }
};

// Uniform draw over each cluster's surviving members; deterministic in seed.
SampledQuotient sample_representatives(const QuotientGraph& q, std::uint64_t seed);

// Sensors reached first by BFS from the root (FIFO, neighbours in SensorSet
// order), root at index 0, with the induced adjacency.
struct RootedSubgraph {
  std::vector<std::size_t> sensors;
  // Induced edges in local indices, sorted; (i, j) for every quotient edge
  // sensors[i] -> sensors[j]. Sparse so that extraction stays O(V + E).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  std::size_t size() const { return sensors.size(); }
  bool has_edge(std::size_t a, std::size_t b) const;
  nn::Tensor2 adjacency_matrix() const;  // k x k, 0/1

  friend bool operator==(const RootedSubgraph&, const RootedSubgraph&) = default;
};

RootedSubgraph bfs_subgraph(const QuotientGraph& q, std::size_t root, std::size_t n_max);
// Looks the root up by sensor id; throws UnknownRoot.
RootedSubgraph bfs_subgraph(const SampledQuotient& sq, std::string_view root_id, std::size_t n_max);

struct SubgraphPair {
  std::size_t root = 0;
  RootedSubgraph g1;
  RootedSubgraph g2;
  nn::Tensor2 f1;  // g1.size() x F, scaled
  nn::Tensor2 f2;
  std::vector<std::size_t> reps1;  // representative road node per subgraph row
  std::vector<std::size_t> reps2;
};

// Holds the scaled feature table for every road node, so pair generation is a
// lookup. The scaler is fitted once over the whole road-node population.
class PairSampler {
 public:
  PairSampler(const QuotientGraph& q, const RoadGraph& road, std::span<const AmenityPoint> amenities,
              FeatureSpec spec);

  const QuotientGraph& quotient() const { return *q_; }
  const FeatureSpec& spec() const { return spec_; }
  const ScalerBounds& bounds() const { return bounds_; }
  std::size_t feature_count() const { return spec_.size(); }
  // Scaled feature rows of all road nodes, in canonical node order.
  const nn::Tensor2& scaled_table() const { return table_; }

  nn::Tensor2 features_for(const RootedSubgraph& g, const SampledQuotient& sq) const;
  SubgraphPair make_pair(std::size_t root, std::size_t n_max, std::uint64_t seed) const;

 private:
  const QuotientGraph* q_;
  FeatureSpec spec_;
  ScalerBounds bounds_;
  nn::Tensor2 table_;
};

// Two CSVs for inspection: <stem>_edges.csv (`u_sensor_id,v_sensor_id`, both
// views share it) and <stem>_features.csv (`view,row,sensor_id,road_node_id,<features>`).
void write_pair_dump(const SubgraphPair& pair, const PairSampler& sampler, const RoadGraph& road,
                     const std::filesystem::path& stem);

}  // namespace geoctx
