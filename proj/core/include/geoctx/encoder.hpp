#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "geoctx/nn/layers.hpp"
#include "geoctx/nn/param_store.hpp"
#include "geoctx/sampler.hpp"

namespace geoctx {

inline constexpr std::size_t kFullSubgraph = std::numeric_limits<std::size_t>::max();

struct EncoderConfig {
  std::size_t d_f = 2;
  std::size_t hidden_dim = 320;
  std::size_t d_fc1 = 64;
  std::size_t d_fc2 = 32;
  bool use_graphnorm = true;
  std::size_t n_gcn_layers = 2;
  double temperature = 0.5;
  double lr = 3e-4;
  std::size_t batch = 64;
  std::size_t epochs = 50;
  std::size_t subgraph_nodes = 64;  // kFullSubgraph for the whole component
  bool mean_pool = false;           // readout; root row otherwise

  void validate() const;  // ParameterOutOfRange

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Dense(d_f -> hidden) -> ReLU -> [GCN -> GraphNorm -> ReLU] x n_gcn_layers
// -> Dense(-> d_fc1) -> ReLU -> Dense(-> d_fc2).
class GeometricEncoder {
 public:
  struct Tape;

  GeometricEncoder(const EncoderConfig& cfg, std::uint64_t seed);
  GeometricEncoder(const EncoderConfig& cfg, nn::ParamStore params);  // checks names and shapes

  const EncoderConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // All output rows for a subgraph; s is its normalised adjacency.
  nn::Tensor2 forward(const nn::Tensor2& s, const nn::Tensor2& x, Tape* tape = nullptr) const;
  // Accumulates parameter gradients for d(loss)/d(output rows).
  void backward(const Tape& tape, const nn::Tensor2& dout);

  // Root-row (or mean) readout, 1 x d_fc2.
  nn::Tensor2 readout(const nn::Tensor2& rows) const;
  nn::Tensor2 readout_grad(const nn::Tensor2& dz, Eigen::Index n_rows) const;

  nn::Tensor2 embed(const RootedSubgraph& g, const nn::Tensor2& x) const;

 private:
  struct Ids {
    nn::ParamId w_in, b_in;
    std::vector<nn::ParamId> gcn_w, gn_alpha, gn_gamma, gn_beta;
    nn::ParamId w_fc1, b_fc1, w_fc2, b_fc2;
  };
  void bind_ids();

  EncoderConfig cfg_;
  nn::ParamStore params_;
  Ids ids_;
};

struct GeometricEncoder::Tape {
  nn::Tensor2 s;
  nn::Tensor2 x;
  nn::Tensor2 a0;  // relu(dense_in)
  std::vector<nn::Tensor2> gcn_in;
  std::vector<nn::Tensor2> gcn_out;
  std::vector<nn::GraphNormCache> norm;
  std::vector<nn::Tensor2> act;  // relu after each GCN block
  nn::Tensor2 a_fc1;
};

struct NodeSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1 cut by floor(fraction * n); the remainder goes to
// test. Each list is sorted.
NodeSplit split_nodes(std::size_t n, std::uint64_t seed, double train_fraction = 0.7,
                      double val_fraction = 0.1);

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when fewer than two val sensors
};

struct PretrainResult {
  GeometricEncoder encoder;
  std::vector<EpochLoss> history;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;  // 0: initialisation kept
};

// NT-Xent over the root embeddings of one pair per root.
double contrastive_loss(const GeometricEncoder& enc, const PairSampler& sampler,
                        const std::vector<std::size_t>& roots, std::uint64_t pair_seed);

// Contrastive pre-training. Each epoch draws min(batch, |train|) distinct train
// sensors, takes one Adam step on their pairs, then scores a fixed val batch
// under a fixed pair seed; the best-on-val parameters are returned.
PretrainResult pretrain(const PairSampler& sampler, const EncoderConfig& cfg,
                        const NodeSplit& split, std::uint64_t seed);

// One embedding row per sensor (SensorSet order) from a single seeded
// representative draw.
nn::Tensor2 embed_all(const GeometricEncoder& enc, const PairSampler& sampler, std::uint64_t seed);

void write_loss_history(const std::vector<EpochLoss>& history, const std::filesystem::path& path);
std::vector<EpochLoss> read_loss_history(const std::filesystem::path& path);

// `sensor_id,e0,e1,...`
void write_embeddings_csv(const nn::Tensor2& emb, const SensorSet& sensors,
                          const std::filesystem::path& path);
nn::Tensor2 read_embeddings_csv(const std::filesystem::path& path, const SensorSet& sensors);

void save_encoder(const GeometricEncoder& enc, const std::filesystem::path& dir);
GeometricEncoder load_encoder(const std::filesystem::path& dir);

}  // namespace geoctx
