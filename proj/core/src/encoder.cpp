#include "geoctx/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>
#include <string>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"
#include "geoctx/nn/contrastive.hpp"
#include "geoctx/nn/layers.hpp"

namespace geoctx {

using nn::Tensor2;

void EncoderConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::ParameterOutOfRange, what);
  };
  need(d_f >= 1 && hidden_dim >= 1 && d_fc1 >= 1 && d_fc2 >= 1, "encoder dims must be >= 1");
  need(n_gcn_layers >= 1, "n_gcn_layers must be >= 1");
  need(temperature > 0.0, "temperature must be > 0");
  need(lr > 0.0, "learning rate must be > 0");
  need(batch >= 2, "batch must be >= 2");
  need(subgraph_nodes >= 1, "subgraph size must be >= 1");
}

GeometricEncoder::GeometricEncoder(const EncoderConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
  const auto df = static_cast<Eigen::Index>(cfg_.d_f);
  const auto f1 = static_cast<Eigen::Index>(cfg_.d_fc1);
  const auto f2 = static_cast<Eigen::Index>(cfg_.d_fc2);
  params_.add("dense_in.w", nn::glorot_uniform(df, h, rng));
  params_.add("dense_in.b", Tensor2::Zero(1, h));
  for (std::size_t l = 0; l < cfg_.n_gcn_layers; ++l) {
    const std::string p = "gcn" + std::to_string(l);
    params_.add(p + ".w", nn::glorot_uniform(h, h, rng));
    if (cfg_.use_graphnorm) {
      params_.add(p + ".norm.alpha", Tensor2::Ones(1, h));
      params_.add(p + ".norm.gamma", Tensor2::Ones(1, h));
      params_.add(p + ".norm.beta", Tensor2::Zero(1, h));
    }
  }
  params_.add("fc1.w", nn::glorot_uniform(h, f1, rng));
  params_.add("fc1.b", Tensor2::Zero(1, f1));
  params_.add("fc2.w", nn::glorot_uniform(f1, f2, rng));
  params_.add("fc2.b", Tensor2::Zero(1, f2));
  bind_ids();
}

GeometricEncoder::GeometricEncoder(const EncoderConfig& cfg, nn::ParamStore params)
    : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  bind_ids();
  const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
  auto check = [&](nn::ParamId id, Eigen::Index r, Eigen::Index c) {
    nn::require_shape(params_.value(id), r, c, params_.name(id));
  };
  check(ids_.w_in, static_cast<Eigen::Index>(cfg_.d_f), h);
  check(ids_.b_in, 1, h);
  for (std::size_t l = 0; l < cfg_.n_gcn_layers; ++l) {
    check(ids_.gcn_w[l], h, h);
    if (cfg_.use_graphnorm) {
      check(ids_.gn_alpha[l], 1, h);
      check(ids_.gn_gamma[l], 1, h);
      check(ids_.gn_beta[l], 1, h);
    }
  }
  check(ids_.w_fc1, h, static_cast<Eigen::Index>(cfg_.d_fc1));
  check(ids_.b_fc1, 1, static_cast<Eigen::Index>(cfg_.d_fc1));
  check(ids_.w_fc2, static_cast<Eigen::Index>(cfg_.d_fc1), static_cast<Eigen::Index>(cfg_.d_fc2));
  check(ids_.b_fc2, 1, static_cast<Eigen::Index>(cfg_.d_fc2));
}

void GeometricEncoder::bind_ids() {
  ids_.w_in = params_.id("dense_in.w");
  ids_.b_in = params_.id("dense_in.b");
  for (std::size_t l = 0; l < cfg_.n_gcn_layers; ++l) {
    const std::string p = "gcn" + std::to_string(l);
    ids_.gcn_w.push_back(params_.id(p + ".w"));
    if (cfg_.use_graphnorm) {
      ids_.gn_alpha.push_back(params_.id(p + ".norm.alpha"));
      ids_.gn_gamma.push_back(params_.id(p + ".norm.gamma"));
      ids_.gn_beta.push_back(params_.id(p + ".norm.beta"));
    }
  }
  ids_.w_fc1 = params_.id("fc1.w");
  ids_.b_fc1 = params_.id("fc1.b");
  ids_.w_fc2 = params_.id("fc2.w");
  ids_.b_fc2 = params_.id("fc2.b");
}

Tensor2 GeometricEncoder::forward(const Tensor2& s, const Tensor2& x, Tape* tape) const {
  if (x.cols() != static_cast<Eigen::Index>(cfg_.d_f)) {
    throw Error(ErrorKind::ShapeMismatch, "encoder input has " + std::to_string(x.cols()) +
                                              " features, expected " + std::to_string(cfg_.d_f));
  }
  if (s.rows() != x.rows() || s.cols() != x.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "encoder adjacency does not match feature rows");
  }
  nn::require_finite(x, "encoder input");
  Tensor2 h = nn::relu_forward(
      nn::dense_forward(x, params_.value(ids_.w_in), params_.value(ids_.b_in)));
  if (tape) {
    tape->s = s;
    tape->x = x;
    tape->a0 = h;
    tape->gcn_in.clear();
    tape->gcn_out.clear();
    tape->norm.clear();
    tape->act.clear();
  }
  for (std::size_t l = 0; l < cfg_.n_gcn_layers; ++l) {
    Tensor2 g = nn::gcn_forward(s, h, params_.value(ids_.gcn_w[l]));
    if (tape) tape->gcn_in.push_back(h);
    if (cfg_.use_graphnorm) {
      nn::GraphNormCache cache;
      g = nn::graphnorm_forward(g, params_.value(ids_.gn_alpha[l]), params_.value(ids_.gn_gamma[l]),
                                params_.value(ids_.gn_beta[l]), tape ? &cache : nullptr);
      if (tape) tape->norm.push_back(std::move(cache));
    }
    h = nn::relu_forward(g);
    if (tape) tape->act.push_back(h);
  }
  Tensor2 a1 =
      nn::relu_forward(nn::dense_forward(h, params_.value(ids_.w_fc1), params_.value(ids_.b_fc1)));
  Tensor2 out = nn::dense_forward(a1, params_.value(ids_.w_fc2), params_.value(ids_.b_fc2));
  if (tape) tape->a_fc1 = std::move(a1);
  return out;
}

void GeometricEncoder::backward(const Tape& tape, const Tensor2& dout) {
  const std::size_t layers = cfg_.n_gcn_layers;
  Tensor2 d;
  nn::dense_backward(tape.a_fc1, params_.value(ids_.w_fc2), dout, &d, params_.grad(ids_.w_fc2),
                     params_.grad(ids_.b_fc2));
  d = nn::relu_backward(tape.a_fc1, d);
  const Tensor2& top = layers ? tape.act.back() : tape.a0;
  Tensor2 dh;
  nn::dense_backward(top, params_.value(ids_.w_fc1), d, &dh, params_.grad(ids_.w_fc1),
                     params_.grad(ids_.b_fc1));
  for (std::size_t l = layers; l-- > 0;) {
    Tensor2 dg = nn::relu_backward(tape.act[l], dh);
    if (cfg_.use_graphnorm) {
      Tensor2 dpre;
      nn::graphnorm_backward(tape.norm[l], params_.value(ids_.gn_alpha[l]),
                             params_.value(ids_.gn_gamma[l]), dg, &dpre,
                             params_.grad(ids_.gn_alpha[l]), params_.grad(ids_.gn_gamma[l]),
                             params_.grad(ids_.gn_beta[l]));
      dg = std::move(dpre);
    }
    nn::gcn_backward(tape.s, tape.gcn_in[l], params_.value(ids_.gcn_w[l]), dg, &dh,
                     params_.grad(ids_.gcn_w[l]));
  }
  dh = nn::relu_backward(tape.a0, dh);
  nn::dense_backward(tape.x, params_.value(ids_.w_in), dh, nullptr, params_.grad(ids_.w_in),
                     params_.grad(ids_.b_in));
}

Tensor2 GeometricEncoder::readout(const Tensor2& rows) const {
  if (cfg_.mean_pool) return rows.colwise().sum() / static_cast<double>(rows.rows());
  return rows.topRows(1);
}

Tensor2 GeometricEncoder::readout_grad(const Tensor2& dz, Eigen::Index n_rows) const {
  Tensor2 d = Tensor2::Zero(n_rows, dz.cols());
  if (cfg_.mean_pool) {
    d.rowwise() = dz.row(0) / static_cast<double>(n_rows);
  } else {
    d.row(0) = dz.row(0);
  }
  return d;
}

Tensor2 GeometricEncoder::embed(const RootedSubgraph& g, const Tensor2& x) const {
  const Tensor2 s = nn::normalize_adjacency(g.adjacency_matrix());
  return readout(forward(s, x));
}

NodeSplit split_nodes(std::size_t n, std::uint64_t seed, double train_fraction,
                      double val_fraction) {
  if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0 + 1e-12) {
    throw Error(ErrorKind::ParameterOutOfRange, "node split fractions");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * n + 1e-9));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(val_fraction * n + 1e-9)));
  NodeSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

std::size_t n_max_for(const EncoderConfig& cfg) { return cfg.subgraph_nodes; }

// Loss over one batch of roots; accumulates gradients into `trainee` when given.
double batch_pass(const GeometricEncoder& enc, const PairSampler& sampler,
                  const std::vector<std::size_t>& roots, std::uint64_t pair_seed,
                  GeometricEncoder* trainee) {
  const bool train = trainee != nullptr;
  const std::size_t b = roots.size();
  const auto d = static_cast<Eigen::Index>(enc.config().d_fc2);
  Tensor2 z1(static_cast<Eigen::Index>(b), d);
  Tensor2 z2(static_cast<Eigen::Index>(b), d);
  std::vector<GeometricEncoder::Tape> t1(train ? b : 0);
  std::vector<GeometricEncoder::Tape> t2(train ? b : 0);
  std::vector<Eigen::Index> rows(b);
  for (std::size_t i = 0; i < b; ++i) {
    const SubgraphPair pair =
        sampler.make_pair(roots[i], n_max_for(enc.config()), split_seed(pair_seed, roots[i]));
    const Tensor2 s = nn::normalize_adjacency(pair.g1.adjacency_matrix());
    rows[i] = static_cast<Eigen::Index>(pair.g1.size());
    const auto ii = static_cast<Eigen::Index>(i);
    z1.row(ii) = enc.readout(enc.forward(s, pair.f1, train ? &t1[i] : nullptr));
    z2.row(ii) = enc.readout(enc.forward(s, pair.f2, train ? &t2[i] : nullptr));
  }
  nn::NtXentResult r = nn::ntxent_loss(z1, z2, enc.config().temperature);
  if (train) {
    for (std::size_t i = 0; i < b; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      trainee->backward(t1[i], enc.readout_grad(r.dz1.row(ii), rows[i]));
      trainee->backward(t2[i], enc.readout_grad(r.dz2.row(ii), rows[i]));
    }
  }
  return r.loss;
}

void check_sampler(const GeometricEncoder& enc, const PairSampler& sampler) {
  if (sampler.feature_count() != enc.config().d_f) {
    throw Error(ErrorKind::ShapeMismatch,
                "encoder expects " + std::to_string(enc.config().d_f) + " features, sampler has " +
                    std::to_string(sampler.feature_count()));
  }
}

}  // namespace

double contrastive_loss(const GeometricEncoder& enc, const PairSampler& sampler,
                        const std::vector<std::size_t>& roots, std::uint64_t pair_seed) {
  check_sampler(enc, sampler);
  return batch_pass(enc, sampler, roots, pair_seed, nullptr);
}

PretrainResult pretrain(const PairSampler& sampler, const EncoderConfig& cfg,
                        const NodeSplit& split, std::uint64_t seed) {
  cfg.validate();
  if (split.train.size() < 2) {
    throw Error(ErrorKind::DegenerateBatch,
                std::to_string(split.train.size()) + " train sensors, need at least 2");
  }
  for (std::size_t s : split.train) {
    if (std::find(split.val.begin(), split.val.end(), s) != split.val.end()) {
      throw Error(ErrorKind::ParameterOutOfRange, "train and val sensors overlap");
    }
  }
  PretrainResult result{GeometricEncoder(cfg, split_seed(seed, 11)), {}, 0.0, 0};
  result.best_val_loss = std::numeric_limits<double>::infinity();
  GeometricEncoder& enc = result.encoder;
  check_sampler(enc, sampler);

  std::vector<std::size_t> val_batch = split.val;
  {
    std::mt19937_64 rng(split_seed(seed, 12));
    std::shuffle(val_batch.begin(), val_batch.end(), rng);
    val_batch.resize(std::min(val_batch.size(), cfg.batch));
    std::sort(val_batch.begin(), val_batch.end());
  }
  const bool has_val = val_batch.size() >= 2;
  const std::uint64_t val_seed = split_seed(seed, 13);

  std::mt19937_64 batch_rng(split_seed(seed, 10));
  std::vector<std::size_t> pool = split.train;
  std::vector<Tensor2> best = enc.params().snapshot();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), batch_rng);
    std::vector<std::size_t> roots(pool.begin(),
                                   pool.begin() + static_cast<std::ptrdiff_t>(std::min(pool.size(), cfg.batch)));
    enc.params().zero_grad();
    EpochLoss rec;
    rec.epoch = epoch;
    rec.train_loss = batch_pass(enc, sampler, roots, split_seed(seed, 1000 + epoch), &enc);
    nn::adam_step(enc.params(), cfg.lr);
    if (has_val) {
      rec.val_loss = batch_pass(enc, sampler, val_batch, val_seed, nullptr);
      if (rec.val_loss < result.best_val_loss) {
        result.best_val_loss = rec.val_loss;
        result.best_epoch = epoch;
        best = enc.params().snapshot();
      }
    } else {
      rec.val_loss = std::numeric_limits<double>::quiet_NaN();
      result.best_epoch = epoch;
      best = enc.params().snapshot();
    }
    result.history.push_back(rec);
  }
  enc.params().restore(best);
  enc.params().zero_grad();
  return result;
}

Tensor2 embed_all(const GeometricEncoder& enc, const PairSampler& sampler, std::uint64_t seed) {
  check_sampler(enc, sampler);
  const QuotientGraph& q = sampler.quotient();
  const SampledQuotient sq = sample_representatives(q, seed);
  Tensor2 out(static_cast<Eigen::Index>(q.size()), static_cast<Eigen::Index>(enc.config().d_fc2));
  for (std::size_t s = 0; s < q.size(); ++s) {
    const RootedSubgraph g = bfs_subgraph(q, s, enc.config().subgraph_nodes);
    out.row(static_cast<Eigen::Index>(s)) = enc.embed(g, sampler.features_for(g, sq));
  }
  return out;
}

void write_loss_history(const std::vector<EpochLoss>& history, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"epoch", "train_loss", "val_loss"};
  for (const auto& h : history) {
    t.rows.push_back({std::to_string(h.epoch), format_double(h.train_loss),
                      format_double(h.val_loss)});
  }
  write_csv(path, t);
}

std::vector<EpochLoss> read_loss_history(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  t.require_header({"epoch", "train_loss", "val_loss"}, path.string());
  std::vector<EpochLoss> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EpochLoss e;
    e.epoch = static_cast<std::size_t>(parse_int_cell(t.rows[r][0], r + 1, "epoch"));
    e.train_loss = parse_double_cell(t.rows[r][1], r + 1, "train_loss");
    e.val_loss = parse_double_cell(t.rows[r][2], r + 1, "val_loss");
    out.push_back(e);
  }
  return out;
}

void write_embeddings_csv(const Tensor2& emb, const SensorSet& sensors,
                          const std::filesystem::path& path) {
  if (static_cast<std::size_t>(emb.rows()) != sensors.size()) {
    throw Error(ErrorKind::ShapeMismatch, "embedding rows do not match sensors");
  }
  CsvTable t;
  t.header = {"sensor_id"};
  for (Eigen::Index j = 0; j < emb.cols(); ++j) t.header.push_back("e" + std::to_string(j));
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    std::vector<std::string> row{sensors[i].id};
    for (Eigen::Index j = 0; j < emb.cols(); ++j) {
      row.push_back(format_double(emb(static_cast<Eigen::Index>(i), j)));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Tensor2 read_embeddings_csv(const std::filesystem::path& path, const SensorSet& sensors) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "sensor_id") {
    throw Error(ErrorKind::MissingColumn, path.string() + ": expected sensor_id column");
  }
  const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
  Tensor2 out(static_cast<Eigen::Index>(sensors.size()), d);
  std::vector<bool> seen(sensors.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto idx = sensors.index_of(t.rows[r][0]);
    if (!idx) throw Error(ErrorKind::UnknownSensorColumn, "embedding for unknown sensor " + t.rows[r][0]);
    seen[*idx] = true;
    for (Eigen::Index j = 0; j < d; ++j) {
      out(static_cast<Eigen::Index>(*idx), j) =
          parse_double_cell(t.rows[r][static_cast<std::size_t>(j + 1)], r + 1, t.header[j + 1]);
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw Error(ErrorKind::MissingColumn, "no embedding for sensor " + sensors[i].id);
  }
  return out;
}

void save_encoder(const GeometricEncoder& enc, const std::filesystem::path& dir) {
  const auto& c = enc.config();
  nlohmann::json meta = {{"model", "geometric-encoder"},
                         {"d_f", c.d_f},
                         {"hidden_dim", c.hidden_dim},
                         {"d_fc1", c.d_fc1},
                         {"d_fc2", c.d_fc2},
                         {"use_graphnorm", c.use_graphnorm},
                         {"n_gcn_layers", c.n_gcn_layers},
                         {"temperature", c.temperature},
                         {"lr", c.lr},
                         {"batch", c.batch},
                         {"epochs", c.epochs},
                         {"subgraph_nodes", c.subgraph_nodes == kFullSubgraph
                                                ? nlohmann::json(nullptr)
                                                : nlohmann::json(c.subgraph_nodes)},
                         {"mean_pool", c.mean_pool}};
  nn::save_checkpoint(enc.params(), dir, meta.dump());
}

GeometricEncoder load_encoder(const std::filesystem::path& dir) {
  std::string meta_text;
  nn::ParamStore params = nn::load_checkpoint(dir, &meta_text);
  const auto meta = nlohmann::json::parse(meta_text);
  if (meta.value("model", "") != "geometric-encoder") {
    throw Error(ErrorKind::BadConfig, dir.string() + " is not an encoder checkpoint");
  }
  EncoderConfig c;
  try {
    c.d_f = meta.at("d_f");
    c.hidden_dim = meta.at("hidden_dim");
    c.d_fc1 = meta.at("d_fc1");
    c.d_fc2 = meta.at("d_fc2");
    c.use_graphnorm = meta.at("use_graphnorm");
    c.n_gcn_layers = meta.at("n_gcn_layers");
    c.temperature = meta.at("temperature");
    c.lr = meta.at("lr");
    c.batch = meta.at("batch");
    c.epochs = meta.at("epochs");
    c.subgraph_nodes = meta.at("subgraph_nodes").is_null() ? kFullSubgraph
                                                           : meta.at("subgraph_nodes").get<std::size_t>();
    c.mean_pool = meta.at("mean_pool");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("encoder metadata: ") + e.what());
  }
  return GeometricEncoder(c, std::move(params));
}

}  // namespace geoctx
