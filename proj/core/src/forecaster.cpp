#include "geoctx/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/nn/layers.hpp"
#include "geoctx/sampler.hpp"

namespace geoctx {

using nn::Tensor2;

void ForecastConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::ParameterOutOfRange, what);
  };
  need(s >= 1 && t >= 1 && d_h >= 1, "S, T and d_h must be >= 1");
  need(n_st_layers >= 1 && n_st_layers < 16, "n_st_layers must be in [1, 15]");
  need(!use_adaptive_adj || adaptive_rank >= 1, "adaptive rank must be >= 1");
  need(lr > 0.0, "forecaster learning rate must be > 0");
  need(batch_size >= 1, "batch size must be >= 1");
}

double WindowBatch::input(std::size_t b, std::size_t step, std::size_t node) const {
  return inputs(static_cast<Eigen::Index>(b * n + node), static_cast<Eigen::Index>(step));
}

double WindowBatch::target(std::size_t b, std::size_t step, std::size_t node) const {
  return targets(static_cast<Eigen::Index>(b * n + node), static_cast<Eigen::Index>(step));
}

WindowSource::WindowSource(const SpeedSeries& series, std::size_t s, std::size_t t)
    : series_(&series), s_(s), t_(t), count_(0) {
  if (s == 0 || t == 0) throw Error(ErrorKind::ParameterOutOfRange, "S and T must be >= 1");
  if (series.length() < s + t) {
    throw Error(ErrorKind::TooShort, "split of " + std::to_string(series.length()) +
                                         " steps is shorter than S+T = " + std::to_string(s + t));
  }
  count_ = series.length() - s - t + 1;
}

WindowBatch WindowSource::gather(std::span<const std::size_t> starts) const {
  const std::size_t n = nodes();
  WindowBatch b;
  b.batch = starts.size();
  b.n = n;
  const auto rows = static_cast<Eigen::Index>(starts.size() * n);
  b.inputs.resize(rows, static_cast<Eigen::Index>(s_));
  b.targets.resize(rows, static_cast<Eigen::Index>(t_));
  b.mask.resize(rows, static_cast<Eigen::Index>(t_));
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t start = starts[w];
    if (start >= count_) throw Error(ErrorKind::ParameterOutOfRange, "window index out of range");
    for (std::size_t node = 0; node < n; ++node) {
      const auto r = static_cast<Eigen::Index>(w * n + node);
      for (std::size_t k = 0; k < s_; ++k) {
        b.inputs(r, static_cast<Eigen::Index>(k)) = series_->at(start + k, node);
      }
      for (std::size_t k = 0; k < t_; ++k) {
        const double v = series_->at(start + s_ + k, node);
        const bool ok = !is_missing(v);
        b.targets(r, static_cast<Eigen::Index>(k)) = ok ? v : 0.0;
        b.mask(r, static_cast<Eigen::Index>(k)) = ok ? 1.0 : 0.0;
      }
    }
  }
  return b;
}

WindowBatch WindowSource::all() const {
  std::vector<std::size_t> starts(count_);
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  return gather(starts);
}

WindowSource make_windows(const SpeedSeries& series, std::size_t s, std::size_t t) {
  return WindowSource(series, s, t);
}

Normalizer Normalizer::fit(const SpeedSeries& train) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : train.values) {
    if (is_missing(v)) continue;
    sum += v;
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::EmptyMask, "train split has no observed speeds");
  Normalizer n;
  n.mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (double v : train.values) {
    if (!is_missing(v)) sq += (v - n.mean) * (v - n.mean);
  }
  n.stddev = std::sqrt(sq / static_cast<double>(count));
  if (!(n.stddev > 1e-12)) n.stddev = 1.0;
  return n;
}

MaeResult mae_loss(const Tensor2& pred, const Tensor2& target, const Tensor2& mask) {
  nn::require_shape(target, pred.rows(), pred.cols(), "mae target");
  nn::require_shape(mask, pred.rows(), pred.cols(), "mae mask");
  const double count = mask.sum();
  if (!(count > 0.0)) throw Error(ErrorKind::EmptyMask, "no valid target cells");
  MaeResult r;
  const Tensor2 diff = pred - target;
  r.loss = (diff.cwiseAbs().cwiseProduct(mask)).sum() / count;
  r.grad = (diff.array().sign() * mask.array()) / count;
  return r;
}

Tensor2 adaptive_adjacency(const Tensor2& e1, const Tensor2& e2) {
  if (e1.cols() < 1 || e1.cols() != e2.cols() || e1.rows() != e2.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "adaptive adjacency factors");
  }
  Tensor2 a = (e1 * e2.transpose()).cwiseMax(0.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double mx = a.row(i).maxCoeff();
    a.row(i) = (a.row(i).array() - mx).exp();
    a.row(i) /= a.row(i).sum();
  }
  return a;
}

void adaptive_adjacency_backward(const Tensor2& e1, const Tensor2& e2, const Tensor2& adj,
                                 const Tensor2& dadj, Tensor2& de1, Tensor2& de2) {
  const Tensor2 m = e1 * e2.transpose();
  Tensor2 dm = adj.cwiseProduct(dadj);
  const Eigen::VectorXd row_dot = dm.rowwise().sum();
  dm -= row_dot.asDiagonal() * adj;
  dm = (m.array() > 0.0).select(dm, 0.0);
  de1.noalias() += dm * e2;
  de2.noalias() += dm.transpose() * e1;
}

namespace {

Tensor2 sigmoid(const Tensor2& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

// Applies the N x N matrix m to each consecutive block of n rows.
Tensor2 block_mul(const Tensor2& m, const Tensor2& x, std::size_t n) {
  const auto nn_ = static_cast<Eigen::Index>(n);
  Tensor2 out(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < x.rows(); b += nn_) {
    out.middleRows(b, nn_).noalias() = m * x.middleRows(b, nn_);
  }
  return out;
}

Tensor2 block_mul_t(const Tensor2& m, const Tensor2& x, std::size_t n) {
  const auto nn_ = static_cast<Eigen::Index>(n);
  Tensor2 out(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < x.rows(); b += nn_) {
    out.middleRows(b, nn_).noalias() = m.transpose() * x.middleRows(b, nn_);
  }
  return out;
}

}  // namespace

Tensor2 sga_combine(const Tensor2& h, const Tensor2& e, const Tensor2& w_p, const Tensor2& w_g,
                    const Tensor2& b_g, SgaCache* cache) {
  if (h.rows() != e.rows()) throw Error(ErrorKind::ShapeMismatch, "sga: hidden and embedding rows");
  nn::require_shape(w_p, e.cols(), h.cols(), "sga w_p");
  nn::require_shape(w_g, e.cols(), h.cols(), "sga w_g");
  nn::require_shape(b_g, 1, h.cols(), "sga b_g");
  Tensor2 pre = e * w_g;
  pre.rowwise() += b_g.row(0);
  Tensor2 gate = sigmoid(pre);
  Tensor2 proj = e * w_p;
  Tensor2 out = h + gate.cwiseProduct(proj);
  if (cache) {
    cache->gate = std::move(gate);
    cache->proj = std::move(proj);
  }
  return out;
}

void sga_backward(const Tensor2& e, const SgaCache& cache, const Tensor2& dy, Tensor2& dw_p,
                  Tensor2& dw_g, Tensor2& db_g) {
  const Tensor2 dproj = dy.cwiseProduct(cache.gate);
  dw_p.noalias() += e.transpose() * dproj;
  const Tensor2 dpre = (dy.array() * cache.proj.array() * cache.gate.array() *
                        (1.0 - cache.gate.array()))
                           .matrix();
  dw_g.noalias() += e.transpose() * dpre;
  db_g += dpre.colwise().sum();
}

Tensor2 quotient_support(const QuotientGraph& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  Tensor2 a = Tensor2::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (q.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return nn::normalize_adjacency(a);
}

Forecaster::Forecaster(const ForecastConfig& cfg, const Tensor2& support, Normalizer norm,
                       std::size_t d_emb, std::uint64_t seed)
    : cfg_(cfg), n_(static_cast<std::size_t>(support.rows())), d_emb_(cfg.use_sga ? d_emb : 0),
      support_(support), norm_(norm) {
  cfg_.validate();
  if (support.rows() != support.cols() || n_ == 0) {
    throw Error(ErrorKind::ShapeMismatch, "forecaster support must be square and non-empty");
  }
  if (cfg_.use_sga && d_emb_ == 0) {
    throw Error(ErrorKind::ShapeMismatch, "SGA needs an embedding width >= 1");
  }
  const auto d = static_cast<Eigen::Index>(cfg_.d_h);
  const auto n = static_cast<Eigen::Index>(n_);
  std::mt19937_64 main(split_seed(seed, 21));
  std::mt19937_64 adaptive(split_seed(seed, 22));
  std::mt19937_64 sga(split_seed(seed, 23));

  params_.add("start.w", nn::glorot_uniform(1, d, main));
  params_.add("start.b", Tensor2::Zero(1, d));
  for (std::size_t l = 0; l < cfg_.n_st_layers; ++l) {
    const std::string p = "st" + std::to_string(l);
    params_.add(p + ".tcn.w_now", nn::glorot_uniform(d, 2 * d, main));
    params_.add(p + ".tcn.w_past", nn::glorot_uniform(d, 2 * d, main));
    params_.add(p + ".tcn.b", Tensor2::Zero(1, 2 * d));
    params_.add(p + ".gcn.w", nn::glorot_uniform(d, d, main));
  }
  params_.add("head.w", nn::glorot_uniform(d, static_cast<Eigen::Index>(cfg_.t), main));
  params_.add("head.b", Tensor2::Zero(1, static_cast<Eigen::Index>(cfg_.t)));
  if (cfg_.use_adaptive_adj) {
    const auto r = static_cast<Eigen::Index>(cfg_.adaptive_rank);
    std::normal_distribution<double> dist(0.0, std::pow(static_cast<double>(r), -0.25));
    Tensor2 e1(n, r), e2(n, r);
    for (Eigen::Index i = 0; i < e1.size(); ++i) e1.data()[i] = dist(adaptive);
    for (Eigen::Index i = 0; i < e2.size(); ++i) e2.data()[i] = dist(adaptive);
    params_.add("adaptive.e1", std::move(e1));
    params_.add("adaptive.e2", std::move(e2));
    for (std::size_t l = 0; l < cfg_.n_st_layers; ++l) {
      params_.add("st" + std::to_string(l) + ".gcn.w_adaptive", nn::glorot_uniform(d, d, adaptive));
    }
  }
  if (cfg_.use_sga) {
    const auto de = static_cast<Eigen::Index>(d_emb_);
    params_.add("sga.w_p", Tensor2::Zero(de, d));
    params_.add("sga.w_g", nn::glorot_uniform(de, d, sga));
    params_.add("sga.b_g", Tensor2::Zero(1, d));
  }
  init_ids();
}

Forecaster::Forecaster(const ForecastConfig& cfg, const Tensor2& support, Normalizer norm,
                       std::size_t d_emb, nn::ParamStore params)
    : cfg_(cfg), n_(static_cast<std::size_t>(support.rows())), d_emb_(cfg.use_sga ? d_emb : 0),
      support_(support), norm_(norm), params_(std::move(params)) {
  cfg_.validate();
  init_ids();
  const auto d = static_cast<Eigen::Index>(cfg_.d_h);
  nn::require_shape(params_.value(ids_.w_start), 1, d, "start.w");
  nn::require_shape(params_.value(ids_.w_head), d, static_cast<Eigen::Index>(cfg_.t), "head.w");
  if (ids_.e1) {
    nn::require_shape(params_.value(*ids_.e1), static_cast<Eigen::Index>(n_),
                      static_cast<Eigen::Index>(cfg_.adaptive_rank), "adaptive.e1");
  }
  if (ids_.w_p) {
    nn::require_shape(params_.value(*ids_.w_p), static_cast<Eigen::Index>(d_emb_), d, "sga.w_p");
  }
}

void Forecaster::init_ids() {
  ids_.w_start = params_.id("start.w");
  ids_.b_start = params_.id("start.b");
  for (std::size_t l = 0; l < cfg_.n_st_layers; ++l) {
    const std::string p = "st" + std::to_string(l);
    ids_.w_now.push_back(params_.id(p + ".tcn.w_now"));
    ids_.w_past.push_back(params_.id(p + ".tcn.w_past"));
    ids_.b_tcn.push_back(params_.id(p + ".tcn.b"));
    ids_.w_gcn.push_back(params_.id(p + ".gcn.w"));
    if (cfg_.use_adaptive_adj) ids_.w_adp.push_back(params_.id(p + ".gcn.w_adaptive"));
  }
  ids_.w_head = params_.id("head.w");
  ids_.b_head = params_.id("head.b");
  if (cfg_.use_adaptive_adj) {
    ids_.e1 = params_.id("adaptive.e1");
    ids_.e2 = params_.id("adaptive.e2");
  }
  if (cfg_.use_sga) {
    ids_.w_p = params_.id("sga.w_p");
    ids_.w_g = params_.id("sga.w_g");
    ids_.b_g = params_.id("sga.b_g");
  }

  const std::size_t layers = cfg_.n_st_layers;
  dilation_.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) dilation_[l] = std::size_t{1} << l;
  needed_.assign(layers + 1, {});
  needed_[layers] = {cfg_.s - 1};
  for (std::size_t l = layers; l-- > 0;) {
    std::vector<std::size_t> steps = needed_[l + 1];
    for (std::size_t t : needed_[l + 1]) {
      if (t >= dilation_[l]) steps.push_back(t - dilation_[l]);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    needed_[l] = std::move(steps);
  }
}

bool Forecaster::sga_active(const Tensor2* emb) const {
  if (!cfg_.use_sga || emb == nullptr) return false;
  nn::require_shape(*emb, static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(d_emb_),
                    "forecaster embeddings");
  return true;
}

Tensor2 Forecaster::forward(const Tensor2& inputs, const Tensor2* emb, Tape* tape) const {
  const auto s = static_cast<Eigen::Index>(cfg_.s);
  if (inputs.cols() != s || inputs.rows() == 0 ||
      inputs.rows() % static_cast<Eigen::Index>(n_) != 0) {
    throw Error(ErrorKind::ShapeMismatch, "forecaster inputs must be (B*N) x S with N = " +
                                              std::to_string(n_) + ", S = " +
                                              std::to_string(cfg_.s));
  }
  Tape local;
  Tape& tp = tape ? *tape : local;
  const std::size_t layers = cfg_.n_st_layers;
  const auto d = static_cast<Eigen::Index>(cfg_.d_h);
  tp.rows = static_cast<std::size_t>(inputs.rows());
  tp.inputs = inputs;
  tp.h.assign(layers + 1, std::vector<Tensor2>(cfg_.s));
  tp.tanh_a.assign(layers, std::vector<Tensor2>(cfg_.s));
  tp.sig_g.assign(layers, std::vector<Tensor2>(cfg_.s));
  tp.z.assign(layers, std::vector<Tensor2>(cfg_.s));
  tp.sz.assign(layers, std::vector<Tensor2>(cfg_.s));
  tp.az.assign(layers, std::vector<Tensor2>(cfg_.s));
  if (cfg_.use_adaptive_adj) {
    tp.adj = adaptive_adjacency(params_.value(*ids_.e1), params_.value(*ids_.e2));
  }

  for (std::size_t t : needed_[0]) {
    Tensor2 h = inputs.col(static_cast<Eigen::Index>(t)) * params_.value(ids_.w_start);
    h.rowwise() += params_.value(ids_.b_start).row(0);
    tp.h[0][t] = std::move(h);
  }
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t t : needed_[l + 1]) {
      const Tensor2& cur = tp.h[l][t];
      Tensor2 pre = cur * params_.value(ids_.w_now[l]);
      pre.rowwise() += params_.value(ids_.b_tcn[l]).row(0);
      if (t >= dilation_[l]) pre.noalias() += tp.h[l][t - dilation_[l]] * params_.value(ids_.w_past[l]);
      Tensor2 ta = pre.leftCols(d).array().tanh().matrix();
      Tensor2 sg = sigmoid(pre.rightCols(d));
      Tensor2 z = ta.cwiseProduct(sg);
      Tensor2 sz = block_mul(support_, z, n_);
      Tensor2 next = sz * params_.value(ids_.w_gcn[l]);
      if (cfg_.use_adaptive_adj) {
        Tensor2 az = block_mul(tp.adj, z, n_);
        next.noalias() += az * params_.value(ids_.w_adp[l]);
        tp.az[l][t] = std::move(az);
      }
      next += cur;
      tp.h[l + 1][t] = std::move(next);
      tp.tanh_a[l][t] = std::move(ta);
      tp.sig_g[l][t] = std::move(sg);
      tp.z[l][t] = std::move(z);
      tp.sz[l][t] = std::move(sz);
    }
  }
  tp.last = tp.h[layers][cfg_.s - 1];
  tp.emb = nullptr;
  if (sga_active(emb)) {
    tp.emb = emb;
    const Tensor2 zero = Tensor2::Zero(static_cast<Eigen::Index>(n_), d);
    const Tensor2 add = sga_combine(zero, *emb, params_.value(*ids_.w_p), params_.value(*ids_.w_g),
                                    params_.value(*ids_.b_g), &tp.sga);
    const auto nn_ = static_cast<Eigen::Index>(n_);
    for (Eigen::Index b = 0; b < tp.last.rows(); b += nn_) tp.last.middleRows(b, nn_) += add;
  }
  Tensor2 out = tp.last * params_.value(ids_.w_head);
  out.rowwise() += params_.value(ids_.b_head).row(0);
  return out;
}

void Forecaster::backward(const Tape& tp, const Tensor2& dpred) {
  nn::require_shape(dpred, static_cast<Eigen::Index>(tp.rows), static_cast<Eigen::Index>(cfg_.t),
                    "forecaster grad");
  const std::size_t layers = cfg_.n_st_layers;
  const auto d = static_cast<Eigen::Index>(cfg_.d_h);
  const auto rows = static_cast<Eigen::Index>(tp.rows);
  const auto nn_ = static_cast<Eigen::Index>(n_);

  params_.grad(ids_.w_head).noalias() += tp.last.transpose() * dpred;
  params_.grad(ids_.b_head) += dpred.colwise().sum();
  Tensor2 dlast = dpred * params_.value(ids_.w_head).transpose();
  if (tp.emb) {
    Tensor2 dq = Tensor2::Zero(nn_, d);
    for (Eigen::Index b = 0; b < rows; b += nn_) dq += dlast.middleRows(b, nn_);
    sga_backward(*tp.emb, tp.sga, dq, params_.grad(*ids_.w_p), params_.grad(*ids_.w_g),
                 params_.grad(*ids_.b_g));
  }

  std::vector<std::vector<Tensor2>> dh(layers + 1, std::vector<Tensor2>(cfg_.s));
  for (std::size_t l = 0; l <= layers; ++l) {
    for (std::size_t t : needed_[l]) dh[l][t] = Tensor2::Zero(rows, d);
  }
  dh[layers][cfg_.s - 1] = std::move(dlast);
  Tensor2 dadj;
  if (cfg_.use_adaptive_adj) dadj = Tensor2::Zero(nn_, nn_);

  for (std::size_t l = layers; l-- > 0;) {
    for (std::size_t t : needed_[l + 1]) {
      const Tensor2& g = dh[l + 1][t];
      dh[l][t] += g;
      params_.grad(ids_.w_gcn[l]).noalias() += tp.sz[l][t].transpose() * g;
      Tensor2 dz = block_mul_t(support_, g * params_.value(ids_.w_gcn[l]).transpose(), n_);
      if (cfg_.use_adaptive_adj) {
        params_.grad(ids_.w_adp[l]).noalias() += tp.az[l][t].transpose() * g;
        const Tensor2 gw = g * params_.value(ids_.w_adp[l]).transpose();
        dz += block_mul_t(tp.adj, gw, n_);
        const Tensor2& z = tp.z[l][t];
        for (Eigen::Index b = 0; b < rows; b += nn_) {
          dadj.noalias() += gw.middleRows(b, nn_) * z.middleRows(b, nn_).transpose();
        }
      }
      const auto& ta = tp.tanh_a[l][t].array();
      const auto& sg = tp.sig_g[l][t].array();
      Tensor2 dpre(rows, 2 * d);
      dpre.leftCols(d) = (dz.array() * sg * (1.0 - ta.square())).matrix();
      dpre.rightCols(d) = (dz.array() * ta * sg * (1.0 - sg)).matrix();
      params_.grad(ids_.w_now[l]).noalias() += tp.h[l][t].transpose() * dpre;
      params_.grad(ids_.b_tcn[l]) += dpre.colwise().sum();
      dh[l][t].noalias() += dpre * params_.value(ids_.w_now[l]).transpose();
      if (t >= dilation_[l]) {
        const std::size_t p = t - dilation_[l];
        params_.grad(ids_.w_past[l]).noalias() += tp.h[l][p].transpose() * dpre;
        dh[l][p].noalias() += dpre * params_.value(ids_.w_past[l]).transpose();
      }
    }
  }
  if (cfg_.use_adaptive_adj) {
    adaptive_adjacency_backward(params_.value(*ids_.e1), params_.value(*ids_.e2), tp.adj, dadj,
                                params_.grad(*ids_.e1), params_.grad(*ids_.e2));
  }
  for (std::size_t t : needed_[0]) {
    params_.grad(ids_.w_start).noalias() +=
        tp.inputs.col(static_cast<Eigen::Index>(t)).transpose() * dh[0][t];
    params_.grad(ids_.b_start) += dh[0][t].colwise().sum();
  }
}

Tensor2 Forecaster::normalize_inputs(const WindowBatch& batch) const {
  Tensor2 x = batch.inputs;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double& v = x.data()[i];
    v = is_missing(v) ? 0.0 : norm_.forward(v);
  }
  return x;
}

Tensor2 Forecaster::predict(const WindowBatch& batch, const Tensor2* emb) const {
  if (batch.n != n_) throw Error(ErrorKind::ShapeMismatch, "window batch node count");
  Tensor2 out = forward(normalize_inputs(batch), emb);
  out.array() = out.array() * norm_.stddev + norm_.mean;
  return out;
}

namespace {

struct MaeAccumulator {
  std::vector<double> sum;
  std::vector<double> count;

  explicit MaeAccumulator(std::size_t t) : sum(t, 0.0), count(t, 0.0) {}

  void add(const Tensor2& pred, const Tensor2& target, const Tensor2& mask) {
    nn::require_shape(target, pred.rows(), pred.cols(), "horizon target");
    nn::require_shape(mask, pred.rows(), pred.cols(), "horizon mask");
    for (Eigen::Index k = 0; k < pred.cols(); ++k) {
      sum[static_cast<std::size_t>(k)] +=
          ((pred.col(k) - target.col(k)).cwiseAbs().cwiseProduct(mask.col(k))).sum();
      count[static_cast<std::size_t>(k)] += mask.col(k).sum();
    }
  }

  HorizonMae result() const {
    HorizonMae r;
    double s = 0.0, c = 0.0;
    for (std::size_t k = 0; k < sum.size(); ++k) {
      r.per_step.push_back(count[k] > 0 ? sum[k] / count[k] : std::nan(""));
      s += sum[k];
      c += count[k];
    }
    r.all = c > 0 ? s / c : std::nan("");
    return r;
  }
};

HorizonMae evaluate_starts(const Forecaster& model, const WindowSource& windows,
                           const std::vector<std::size_t>& starts, const Tensor2* emb,
                           std::size_t chunk) {
  MaeAccumulator acc(model.config().t);
  for (std::size_t i = 0; i < starts.size(); i += chunk) {
    const std::span<const std::size_t> part(starts.data() + i, std::min(chunk, starts.size() - i));
    const WindowBatch b = windows.gather(part);
    acc.add(model.predict(b, emb), b.targets, b.mask);
  }
  return acc.result();
}

}  // namespace

HorizonMae horizon_mae(const Tensor2& pred, const Tensor2& target, const Tensor2& mask) {
  MaeAccumulator acc(static_cast<std::size_t>(pred.cols()));
  acc.add(pred, target, mask);
  return acc.result();
}

HorizonMae evaluate(const Forecaster& model, const WindowSource& windows, const Tensor2* emb,
                    std::size_t chunk) {
  if (windows.s() != model.config().s || windows.t() != model.config().t) {
    throw Error(ErrorKind::ShapeMismatch, "window shape does not match the model");
  }
  std::vector<std::size_t> starts(windows.size());
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  return evaluate_starts(model, windows, starts, emb, std::max<std::size_t>(chunk, 1));
}

Tensor2 persistence_forecast(const WindowBatch& batch, std::size_t t) {
  Tensor2 out(batch.inputs.rows(), static_cast<Eigen::Index>(t));
  for (Eigen::Index r = 0; r < batch.inputs.rows(); ++r) {
    double last = std::nan("");
    for (Eigen::Index k = batch.inputs.cols(); k-- > 0;) {
      if (!is_missing(batch.inputs(r, k))) {
        last = batch.inputs(r, k);
        break;
      }
    }
    out.row(r).setConstant(last);
  }
  return out;
}

TrainResult train_forecaster(const SpeedSeries& train, const SpeedSeries& val,
                             const QuotientGraph& q, const Tensor2* emb, const ForecastConfig& cfg,
                             std::uint64_t seed) {
  cfg.validate();
  if (train.n_sensors != q.size() || val.n_sensors != q.size()) {
    throw Error(ErrorKind::ShapeMismatch, "speed series and quotient disagree on sensor count");
  }
  const WindowSource train_windows(train, cfg.s, cfg.t);
  const WindowSource val_windows(val, cfg.s, cfg.t);
  const std::size_t d_emb = emb ? static_cast<std::size_t>(emb->cols()) : 0;
  const Tensor2* sga_emb = cfg.use_sga ? emb : nullptr;
  if (cfg.use_sga && !emb) throw Error(ErrorKind::ShapeMismatch, "SGA requested without embeddings");

  TrainResult result{Forecaster(cfg, quotient_support(q), Normalizer::fit(train), d_emb, seed),
                     {}, std::numeric_limits<double>::infinity(), 0};
  Forecaster& model = result.model;
  const double scale = model.normalizer().stddev;
  const double shift = model.normalizer().mean;

  std::vector<std::size_t> val_starts;
  if (cfg.val_windows == 0 || cfg.val_windows >= val_windows.size()) {
    val_starts.resize(val_windows.size());
    std::iota(val_starts.begin(), val_starts.end(), std::size_t{0});
  } else {
    for (std::size_t i = 0; i < cfg.val_windows; ++i) {
      val_starts.push_back(i * val_windows.size() / cfg.val_windows);
    }
  }

  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t per_epoch = cfg.windows_per_epoch == 0
                                    ? order.size()
                                    : std::min(cfg.windows_per_epoch, order.size());
  std::mt19937_64 rng(split_seed(seed, 24));
  std::vector<Tensor2> best = model.params().snapshot();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t i = 0; i < per_epoch; i += cfg.batch_size) {
      const std::span<const std::size_t> part(order.data() + i,
                                              std::min(cfg.batch_size, per_epoch - i));
      const WindowBatch b = train_windows.gather(part);
      if (b.mask.sum() == 0.0) continue;
      Forecaster::Tape tape;
      Tensor2 pred = model.forward(model.normalize_inputs(b), sga_emb, &tape);
      pred.array() = pred.array() * scale + shift;
      MaeResult mae = mae_loss(pred, b.targets, b.mask);
      model.params().zero_grad();
      model.backward(tape, mae.grad * scale);
      nn::adam_step(model.params(), cfg.lr);
      loss_sum += mae.loss;
      ++batches;
    }
    ForecastEpoch rec;
    rec.epoch = epoch;
    rec.train_mae = batches ? loss_sum / static_cast<double>(batches) : std::nan("");
    rec.val_mae = evaluate_starts(model, val_windows, val_starts, sga_emb, 64).all;
    if (rec.val_mae < result.best_val_mae) {
      result.best_val_mae = rec.val_mae;
      result.best_epoch = epoch;
      best = model.params().snapshot();
    }
    result.history.push_back(rec);
  }
  model.params().restore(best);
  model.params().zero_grad();
  return result;
}

void save_forecaster(const Forecaster& model, const std::filesystem::path& dir) {
  const auto& c = model.config();
  const nlohmann::json meta = {{"model", "forecaster"},
                               {"s", c.s},
                               {"t", c.t},
                               {"d_h", c.d_h},
                               {"n_st_layers", c.n_st_layers},
                               {"use_sga", c.use_sga},
                               {"use_adaptive_adj", c.use_adaptive_adj},
                               {"adaptive_rank", c.adaptive_rank},
                               {"lr", c.lr},
                               {"epochs", c.epochs},
                               {"batch_size", c.batch_size},
                               {"windows_per_epoch", c.windows_per_epoch},
                               {"val_windows", c.val_windows},
                               {"nodes", model.nodes()},
                               {"d_emb", model.embedding_width()},
                               {"norm_mean", model.normalizer().mean},
                               {"norm_std", model.normalizer().stddev}};
  nn::save_checkpoint(model.params(), dir, meta.dump());
}

Forecaster load_forecaster(const std::filesystem::path& dir, const QuotientGraph& q) {
  std::string meta_text;
  nn::ParamStore params = nn::load_checkpoint(dir, &meta_text);
  const auto meta = nlohmann::json::parse(meta_text);
  if (meta.value("model", "") != "forecaster") {
    throw Error(ErrorKind::BadConfig, dir.string() + " is not a forecaster checkpoint");
  }
  ForecastConfig c;
  Normalizer norm;
  std::size_t nodes = 0, d_emb = 0;
  try {
    c.s = meta.at("s");
    c.t = meta.at("t");
    c.d_h = meta.at("d_h");
    c.n_st_layers = meta.at("n_st_layers");
    c.use_sga = meta.at("use_sga");
    c.use_adaptive_adj = meta.at("use_adaptive_adj");
    c.adaptive_rank = meta.at("adaptive_rank");
    c.lr = meta.at("lr");
    c.epochs = meta.at("epochs");
    c.batch_size = meta.at("batch_size");
    c.windows_per_epoch = meta.at("windows_per_epoch");
    c.val_windows = meta.at("val_windows");
    nodes = meta.at("nodes");
    d_emb = meta.at("d_emb");
    norm.mean = meta.at("norm_mean");
    norm.stddev = meta.at("norm_std");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("forecaster metadata: ") + e.what());
  }
  if (nodes != q.size()) {
    throw Error(ErrorKind::ShapeMismatch, "checkpoint has " + std::to_string(nodes) +
                                              " nodes, quotient has " + std::to_string(q.size()));
  }
  return Forecaster(c, quotient_support(q), norm, d_emb, std::move(params));
}

void write_forecast_history(const std::vector<ForecastEpoch>& history,
                            const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"epoch", "train_loss", "val_loss"};
  for (const auto& h : history) {
    t.rows.push_back({std::to_string(h.epoch), format_double(h.train_mae), format_double(h.val_mae)});
  }
  write_csv(path, t);
}

}  // namespace geoctx
