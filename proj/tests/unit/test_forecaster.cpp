#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "geoctx/error.hpp"
#include "geoctx/forecaster.hpp"
#include "geoctx/pipeline.hpp"
#include "geoctx/synthetic_city.hpp"
#include "gradcheck.hpp"

namespace geoctx {
namespace {

using nn::Tensor2;

SpeedSeries series_of(std::size_t length, std::size_t nodes, const std::function<double(std::size_t, std::size_t)>& f) {
  SpeedSeries s;
  s.n_sensors = nodes;
  for (std::size_t t = 0; t < length; ++t) {
    s.timestamps.push_back(static_cast<std::int64_t>(t) * 300);
    for (std::size_t n = 0; n < nodes; ++n) s.values.push_back(f(t, n));
  }
  return s;
}

TEST(Windows, Counts) {
  const auto s = series_of(24, 2, [](auto t, auto) { return double(t); });
  EXPECT_EQ(make_windows(s, 12, 12).size(), 1u);
  const auto l = series_of(50, 2, [](auto t, auto) { return double(t); });
  EXPECT_EQ(make_windows(l, 12, 12).size(), 50u - 24u + 1u);
  try {
    make_windows(series_of(23, 2, [](auto, auto) { return 0.0; }), 12, 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooShort);
  }
}

TEST(Windows, LayoutAndMask) {
  const auto s = series_of(10, 3, [](auto t, auto n) { return n == 1 && t == 7 ? kMissing : 10.0 * t + n; });
  const WindowSource w(s, 4, 3);
  const std::vector<std::size_t> starts = {2};
  const auto b = w.gather(starts);
  EXPECT_EQ(b.inputs.rows(), 3);
  EXPECT_EQ(b.input(0, 0, 2), 22.0);
  EXPECT_EQ(b.target(0, 0, 1), 61.0);
  // Target step 1 of node 1 is time 7, missing.
  EXPECT_EQ(b.mask(1, 1), 0.0);
  EXPECT_EQ(b.targets(1, 1), 0.0);
  EXPECT_EQ(b.mask(1, 0), 1.0);
}

TEST(Windows, NeverStraddleSplits) {
  const auto s = series_of(100, 1, [](auto t, auto) { return double(t); });
  const auto sp = temporal_split(s);
  const auto w = make_windows(sp.train, 12, 12).all();
  EXPECT_LT(w.targets.maxCoeff(), 70.0);
  const auto v = make_windows(sp.test, 2, 2).all();
  EXPECT_GE(v.inputs.minCoeff(), 80.0);
}

TEST(Sga, ZeroProjectionIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor2 h = testing::random_normal(4, 3, rng);
  const Tensor2 e = testing::random_normal(4, 2, rng);
  const Tensor2 out = sga_combine(h, e, Tensor2::Zero(2, 3), testing::random_normal(2, 3, rng),
                                  testing::random_normal(1, 3, rng));
  EXPECT_EQ(out, h);
}

TEST(Sga, SaturatedGateIsNearIdentity) {
  std::mt19937_64 rng(2);
  const Tensor2 h = testing::random_normal(4, 3, rng);
  const Tensor2 e = testing::random_normal(4, 2, rng, 0.1);
  const Tensor2 out = sga_combine(h, e, testing::random_normal(2, 3, rng), Tensor2::Zero(2, 3),
                                  Tensor2::Constant(1, 3, -30.0));
  EXPECT_LT((out - h).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Adaptive, ZeroEmbeddingsGiveUniformRows) {
  const Tensor2 a = adaptive_adjacency(Tensor2::Zero(4, 2), Tensor2::Zero(4, 2));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(a(i, j), 0.25);
  }
}

TEST(Adaptive, DominantPairAndRowSums) {
  Tensor2 e1 = Tensor2::Zero(3, 1);
  Tensor2 e2 = Tensor2::Zero(3, 1);
  e1(0, 0) = 2.0;
  e2(2, 0) = 3.0;
  const Tensor2 a = adaptive_adjacency(e1, e2);
  EXPECT_GT(a(0, 2), a(0, 0));
  EXPECT_GT(a(0, 2), a(0, 1));
  std::mt19937_64 rng(3);
  const Tensor2 r = adaptive_adjacency(testing::random_normal(5, 3, rng), testing::random_normal(5, 3, rng));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.row(i).sum(), 1.0, 1e-12);
}

TEST(Mae, Cases) {
  const Tensor2 p = Tensor2::Constant(2, 3, 4.0);
  const Tensor2 ones = Tensor2::Ones(2, 3);
  EXPECT_EQ(mae_loss(p, p, ones).loss, 0.0);
  EXPECT_DOUBLE_EQ(mae_loss(p, p.array() + 1.5, ones).loss, 1.5);
  EXPECT_THROW(mae_loss(p, p, Tensor2::Zero(2, 3)), Error);

  std::mt19937_64 rng(4);
  const Tensor2 pred = testing::random_normal(6, 4, rng);
  const Tensor2 tgt = testing::random_normal(6, 4, rng);
  Tensor2 mask = Tensor2::Ones(6, 4);
  mask(2, 3) = 0;
  mask(5, 0) = 0;
  double sum = 0;
  int count = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (mask(i, j) == 0) continue;
      sum += std::abs(pred(i, j) - tgt(i, j));
      ++count;
    }
  }
  EXPECT_NEAR(mae_loss(pred, tgt, mask).loss, sum / count, 1e-15);
}

ForecastConfig tiny_config() {
  ForecastConfig c;
  c.s = 4;
  c.t = 3;
  c.d_h = 4;
  c.epochs = 3;
  c.batch_size = 4;
  return c;
}

TEST(ForecasterModel, ZeroHeadGivesZero) {
  const auto cfg = tiny_config();
  Forecaster m(cfg, Tensor2::Identity(2, 2), Normalizer{}, 0, 1);
  m.params().value(m.params().id("head.w")).setZero();
  EXPECT_EQ(m.forward(Tensor2::Zero(4, 4), nullptr), Tensor2::Zero(4, 3));
}

TEST(ForecasterModel, HandComputedScalarCase) {
  ForecastConfig cfg;
  cfg.s = 2;
  cfg.t = 1;
  cfg.d_h = 1;
  cfg.n_st_layers = 1;
  cfg.use_adaptive_adj = false;
  Forecaster m(cfg, Tensor2::Ones(1, 1), Normalizer{}, 0, 1);
  auto set = [&](const char* name, std::initializer_list<double> v) {
    auto& t = m.params().value(m.params().id(name));
    std::copy(v.begin(), v.end(), t.data());
  };
  set("start.w", {0.5});
  set("start.b", {0.1});
  set("st0.tcn.w_now", {0.3, -0.2});
  set("st0.tcn.w_past", {0.4, 0.7});
  set("st0.tcn.b", {0.05, -0.1});
  set("st0.gcn.w", {0.9});
  set("head.w", {1.5});
  set("head.b", {0.2});
  Tensor2 x(1, 2);
  x << 1.0, 2.0;
  const double h0 = 0.5 * 1.0 + 0.1;
  const double h1 = 0.5 * 2.0 + 0.1;
  const double a = 0.3 * h1 + 0.4 * h0 + 0.05;
  const double g = -0.2 * h1 + 0.7 * h0 - 0.1;
  const double z = std::tanh(a) / (1.0 + std::exp(-g));
  const double want = (0.9 * z + h1) * 1.5 + 0.2;
  EXPECT_NEAR(m.forward(x, nullptr)(0, 0), want, 1e-15);
}

TEST(ForecasterModel, SgaOffMatchesNoEmbeddings) {
  CityParams p;
  p.n_sensors = 8;
  p.days = 1;
  const auto city = generate_city(p);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const auto sp = temporal_split(city.speeds);
  std::mt19937_64 rng(1);
  const Tensor2 emb = testing::random_normal(8, 3, rng);
  auto cfg = tiny_config();
  cfg.windows_per_epoch = 16;
  const auto a = train_forecaster(sp.train, sp.val, q, nullptr, cfg, 5);
  const auto b = train_forecaster(sp.train, sp.val, q, &emb, cfg, 5);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_mae, b.history[i].train_mae);
    EXPECT_EQ(a.history[i].val_mae, b.history[i].val_mae);
  }
  const auto w = make_windows(sp.test, cfg.s, cfg.t);
  EXPECT_EQ(evaluate(a.model, w, nullptr).all, evaluate(b.model, w, &emb).all);
}

TEST(Training, ZeroEpochsAndDeterminism) {
  CityParams p;
  p.n_sensors = 8;
  p.days = 1;
  const auto city = generate_city(p);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const auto sp = temporal_split(city.speeds);
  auto cfg = tiny_config();
  cfg.epochs = 0;
  const auto z = train_forecaster(sp.train, sp.val, q, nullptr, cfg, 3);
  EXPECT_TRUE(z.history.empty());
  const Forecaster init(cfg, quotient_support(q), Normalizer::fit(sp.train), 0, 3);
  for (nn::ParamId id = 0; id < init.params().size(); ++id) {
    EXPECT_EQ(z.model.params().value(id), init.params().value(id));
  }
  cfg.epochs = 4;
  cfg.windows_per_epoch = 32;
  const auto a = train_forecaster(sp.train, sp.val, q, nullptr, cfg, 3);
  const auto b = train_forecaster(sp.train, sp.val, q, nullptr, cfg, 3);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_mae, b.history[i].train_mae);
  }
}

TEST(Training, BestEpochImprovesOnFirst) {
  CityParams p;
  p.n_sensors = 12;
  p.days = 3;
  const auto city = generate_city(p);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  const auto sp = temporal_split(city.speeds);
  auto cfg = tiny_config();
  cfg.s = cfg.t = 12;
  cfg.epochs = 6;
  cfg.windows_per_epoch = 128;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = train_forecaster(sp.train, sp.val, q, nullptr, cfg, seed);
    EXPECT_LT(r.best_val_mae, r.history.front().val_mae) << "seed " << seed;
  }
}

TEST(Evaluation, PerfectModelAndPersistence) {
  Tensor2 t = Tensor2::Ones(4, 3);
  const auto m = horizon_mae(t, t, Tensor2::Ones(4, 3));
  EXPECT_EQ(m.all, 0.0);
  EXPECT_EQ(m.per_step, (std::vector<double>{0, 0, 0}));

  const auto flat = series_of(30, 2, [](auto, auto) { return 55.0; });
  const auto fb = make_windows(flat, 6, 4).all();
  EXPECT_EQ(horizon_mae(persistence_forecast(fb, 4), fb.targets, fb.mask).all, 0.0);

  const double c = 0.7;
  const auto ramp = series_of(40, 3, [c](auto t, auto n) { return c * t + n; });
  const auto rb = make_windows(ramp, 5, 6).all();
  const auto rm = horizon_mae(persistence_forecast(rb, 6), rb.targets, rb.mask);
  for (std::size_t k = 1; k <= 6; ++k) EXPECT_NEAR(rm.per_step[k - 1], k * c, 1e-12);
}

TEST(Normalization, FitSkipsMissing) {
  const auto s = series_of(4, 1, [](auto t, auto) { return t == 2 ? kMissing : 2.0 * t; });
  const auto n = Normalizer::fit(s);
  EXPECT_DOUBLE_EQ(n.mean, 8.0 / 3.0);
  EXPECT_NEAR(n.inverse(n.forward(7.5)), 7.5, 1e-12);
}

TEST(Checkpoint, ForecasterRoundTrip) {
  namespace fs = std::filesystem;
  CityParams p;
  p.n_sensors = 6;
  p.days = 1;
  const auto city = generate_city(p);
  const auto q = build_traffic_graph(city.road, city.sensors, 0.01);
  auto cfg = tiny_config();
  cfg.use_sga = true;
  const Forecaster m(cfg, quotient_support(q), Normalizer{50.0, 8.0}, 3, 7);
  const fs::path dir = fs::temp_directory_path() / "geoctx-unit-forecaster";
  fs::remove_all(dir);
  save_forecaster(m, dir);
  const Forecaster back = load_forecaster(dir, q);
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(back.normalizer().stddev, 8.0);
  std::mt19937_64 rng(1);
  const Tensor2 x = testing::random_normal(12, 4, rng);
  const Tensor2 e = testing::random_normal(6, 3, rng);
  EXPECT_EQ(back.forward(x, &e), m.forward(x, &e));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace geoctx
