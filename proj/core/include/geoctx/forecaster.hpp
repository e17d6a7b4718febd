#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "geoctx/nn/param_store.hpp"
#include "geoctx/quotient.hpp"
#include "geoctx/sensors.hpp"

namespace geoctx {

struct ForecastConfig {
  std::size_t s = 12;  // input steps
  std::size_t t = 12;  // horizon steps
  std::size_t d_h = 16;
  std::size_t n_st_layers = 2;  // dilation 2^(layer-1)
  bool use_sga = false;
  bool use_adaptive_adj = true;
  std::size_t adaptive_rank = 8;
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::size_t windows_per_epoch = 0;  // 0: every train window
  std::size_t val_windows = 0;        // 0: every val window

  void validate() const;  // ParameterOutOfRange

  friend bool operator==(const ForecastConfig&, const ForecastConfig&) = default;
};

// Windows in node-major layout: row b*N + n holds sensor n of window b.
// inputs is (B*N) x S, targets and mask are (B*N) x T; mask is 1 on valid
// target cells.
struct WindowBatch {
  std::size_t batch = 0;
  std::size_t n = 0;
  nn::Tensor2 inputs;
  nn::Tensor2 targets;
  nn::Tensor2 mask;

  double input(std::size_t b, std::size_t step, std::size_t node) const;
  double target(std::size_t b, std::size_t step, std::size_t node) const;
};

// Sliding windows of one split, stride 1: window w reads steps [w, w+S) and
// predicts [w+S, w+S+T).
class WindowSource {
 public:
  WindowSource(const SpeedSeries& series, std::size_t s, std::size_t t);  // TooShort

  std::size_t size() const { return count_; }
  std::size_t s() const { return s_; }
  std::size_t t() const { return t_; }
  std::size_t nodes() const { return series_->n_sensors; }
  const SpeedSeries& series() const { return *series_; }

  WindowBatch gather(std::span<const std::size_t> starts) const;
  WindowBatch all() const;

 private:
  const SpeedSeries* series_;
  std::size_t s_;
  std::size_t t_;
  std::size_t count_;
};

WindowSource make_windows(const SpeedSeries& series, std::size_t s, std::size_t t);

// z-score over the non-missing train cells.
struct Normalizer {
  double mean = 0.0;
  double stddev = 1.0;

  static Normalizer fit(const SpeedSeries& train);
  double forward(double v) const { return (v - mean) / stddev; }
  double inverse(double v) const { return v * stddev + mean; }
};

struct MaeResult {
  double loss = 0.0;
  nn::Tensor2 grad;  // d loss / d pred
};

// Mean |pred - target| over cells with mask 1. Throws EmptyMask.
MaeResult mae_loss(const nn::Tensor2& pred, const nn::Tensor2& target, const nn::Tensor2& mask);

// softmax_row(relu(e1 e2^T)).
nn::Tensor2 adaptive_adjacency(const nn::Tensor2& e1, const nn::Tensor2& e2);
void adaptive_adjacency_backward(const nn::Tensor2& e1, const nn::Tensor2& e2,
                                 const nn::Tensor2& adj, const nn::Tensor2& dadj,
                                 nn::Tensor2& de1, nn::Tensor2& de2);

// h + sigmoid(e w_g + b_g) * (e w_p).
struct SgaCache {
  nn::Tensor2 gate;
  nn::Tensor2 proj;
};
nn::Tensor2 sga_combine(const nn::Tensor2& h, const nn::Tensor2& e, const nn::Tensor2& w_p,
                        const nn::Tensor2& w_g, const nn::Tensor2& b_g, SgaCache* cache = nullptr);
// dy is d loss / d output; dh (optional) equals dy.
void sga_backward(const nn::Tensor2& e, const SgaCache& cache, const nn::Tensor2& dy,
                  nn::Tensor2& dw_p, nn::Tensor2& dw_g, nn::Tensor2& db_g);

// Reduced Graph WaveNet: linear start, n_st_layers of causal gated temporal
// convolution (kernel 2) followed by graph convolution with a residual, SGA
// on the last time step, linear head to T outputs per node. Works on
// z-scored values; predict() maps raw speeds to raw speeds.
class Forecaster {
 public:
  struct Tape;

  // `support` is the normalised sensor adjacency, as from quotient_support().
  // d_emb is the embedding width consumed by SGA (ignored unless cfg.use_sga).
  Forecaster(const ForecastConfig& cfg, const nn::Tensor2& support, Normalizer norm,
             std::size_t d_emb, std::uint64_t seed);
  Forecaster(const ForecastConfig& cfg, const nn::Tensor2& support, Normalizer norm,
             std::size_t d_emb, nn::ParamStore params);

  const ForecastConfig& config() const { return cfg_; }
  const Normalizer& normalizer() const { return norm_; }
  std::size_t nodes() const { return n_; }
  std::size_t embedding_width() const { return d_emb_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // z-scored inputs ((B*N) x S, already finite) to z-scored predictions
  // ((B*N) x T). emb is N x d_emb or null.
  nn::Tensor2 forward(const nn::Tensor2& inputs, const nn::Tensor2* emb,
                      Tape* tape = nullptr) const;
  void backward(const Tape& tape, const nn::Tensor2& dpred);

  // Raw speeds in (NaN allowed), raw speeds out.
  nn::Tensor2 predict(const WindowBatch& batch, const nn::Tensor2* emb) const;
  nn::Tensor2 normalize_inputs(const WindowBatch& batch) const;

 private:
  void init_ids();
  bool sga_active(const nn::Tensor2* emb) const;

  ForecastConfig cfg_;
  std::size_t n_;
  std::size_t d_emb_;
  nn::Tensor2 support_;  // normalised
  Normalizer norm_;
  nn::ParamStore params_;
  std::vector<std::size_t> dilation_;
  // Time steps whose values are needed at each layer boundary; [0] are the
  // start-layer outputs, [l] the outputs of layer l.
  std::vector<std::vector<std::size_t>> needed_;

  struct Ids {
    nn::ParamId w_start, b_start;
    std::vector<nn::ParamId> w_now, w_past, b_tcn, w_gcn, w_adp;
    std::optional<nn::ParamId> e1, e2;
    std::optional<nn::ParamId> w_p, w_g, b_g;
    nn::ParamId w_head, b_head;
  } ids_;
};

struct Forecaster::Tape {
  std::size_t rows = 0;
  nn::Tensor2 inputs;
  nn::Tensor2 adj;  // adaptive adjacency, when used
  // h[l][t]: input of layer l at step t (empty when not needed).
  std::vector<std::vector<nn::Tensor2>> h;
  std::vector<std::vector<nn::Tensor2>> tanh_a;
  std::vector<std::vector<nn::Tensor2>> sig_g;
  std::vector<std::vector<nn::Tensor2>> z;
  std::vector<std::vector<nn::Tensor2>> sz;  // support * z
  std::vector<std::vector<nn::Tensor2>> az;  // adaptive * z
  nn::Tensor2 last;  // final hidden state before the head
  const nn::Tensor2* emb = nullptr;
  SgaCache sga;
};

struct ForecastEpoch {
  std::size_t epoch = 0;
  double train_mae = 0.0;
  double val_mae = 0.0;
};

struct TrainResult {
  Forecaster model;
  std::vector<ForecastEpoch> history;
  double best_val_mae = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
};

// Adam on train windows for cfg.epochs, best-on-val parameters returned.
// Passing emb with cfg.use_sga = false trains the plain baseline.
TrainResult train_forecaster(const SpeedSeries& train, const SpeedSeries& val,
                             const QuotientGraph& q, const nn::Tensor2* emb,
                             const ForecastConfig& cfg, std::uint64_t seed);

struct HorizonMae {
  std::vector<double> per_step;  // 1..T
  double all = 0.0;
};

// MAE in raw units over valid target cells, per horizon step and pooled.
HorizonMae evaluate(const Forecaster& model, const WindowSource& windows, const nn::Tensor2* emb,
                    std::size_t chunk = 64);
HorizonMae horizon_mae(const nn::Tensor2& pred, const nn::Tensor2& target, const nn::Tensor2& mask);
// Repeats the last observed input over the horizon.
nn::Tensor2 persistence_forecast(const WindowBatch& batch, std::size_t t);

// Symmetrised quotient adjacency with self-loops, D^-1/2 (A + I) D^-1/2.
nn::Tensor2 quotient_support(const QuotientGraph& q);

void save_forecaster(const Forecaster& model, const std::filesystem::path& dir);
Forecaster load_forecaster(const std::filesystem::path& dir, const QuotientGraph& q);

void write_forecast_history(const std::vector<ForecastEpoch>& history,
                            const std::filesystem::path& path);

}  // namespace geoctx
