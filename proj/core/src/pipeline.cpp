#include "geoctx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "geoctx/csv.hpp"
#include "geoctx/encoder.hpp"
#include "geoctx/error.hpp"
#include "geoctx/forecaster.hpp"
#include "geoctx/sampler.hpp"

namespace geoctx {

QuotientGraph build_traffic_graph(const RoadGraph& road, const SensorSet& sensors, double epsilon,
                                  DistanceMetric metric) {
  QuotientGraph q = build_quotient(road, sensors, match_sensors(road, sensors, metric));
  return prune_clusters(q, road, sensors, epsilon, metric);
}

Dataset resolve_dataset(const VariantConfig& cfg, const std::filesystem::path& base) {
  if (!cfg.dataset) return dataset_from_city(generate_city(cfg.city));
  std::filesystem::path dir = *cfg.dataset;
  if (dir.is_relative() && !base.empty()) dir = base / dir;
  return load_dataset(dir, true);
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"variant", "seed", "horizon_step", "mae"};
  for (const auto& r : rows) {
    t.rows.push_back({r.variant, std::to_string(r.seed), r.horizon_step, format_double(r.mae)});
  }
  write_csv(path, t);
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::MissingRunArtifacts, path.string() + " not found");
  }
  const CsvTable t = read_csv(path);
  t.require_header({"variant", "seed", "horizon_step", "mae"}, path.string());
  std::vector<MetricRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    MetricRow r;
    r.variant = row[0];
    r.seed = static_cast<std::uint64_t>(parse_int_cell(row[1], i + 1, "seed"));
    r.horizon_step = row[2];
    r.mae = parse_double_cell(row[3], i + 1, "mae");
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::vector<MetricRow> metric_rows(const std::string& arm, std::uint64_t seed, const HorizonMae& m) {
  std::vector<MetricRow> rows;
  for (std::size_t k = 0; k < m.per_step.size(); ++k) {
    rows.push_back({arm, seed, std::to_string(k + 1), m.per_step[k]});
  }
  rows.push_back({arm, seed, "all", m.all});
  return rows;
}

std::vector<MetricRow> run_seed(const VariantConfig& cfg, const QuotientGraph& q,
                                const PairSampler& sampler, const TemporalSplit& split,
                                std::uint64_t seed, const std::filesystem::path& dir,
                                const RunOptions& opts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  const NodeSplit nodes = split_nodes(q.size(), split_seed(seed, 100));
  PretrainResult pre = pretrain(sampler, cfg.encoder(), nodes, split_seed(seed, 101));
  write_loss_history(pre.history, dir / "pretrain_history.csv");
  const nn::Tensor2 emb = embed_all(pre.encoder, sampler, split_seed(seed, 102));
  write_embeddings_csv(emb, q.sensors, dir / "embeddings.csv");

  ForecastConfig base_cfg = cfg.forecast;
  base_cfg.use_sga = false;
  ForecastConfig sga_cfg = cfg.forecast;
  sga_cfg.use_sga = true;
  const std::uint64_t fseed = split_seed(seed, 103);
  TrainResult base = train_forecaster(split.train, split.val, q, nullptr, base_cfg, fseed);
  TrainResult sga = train_forecaster(split.train, split.val, q, &emb, sga_cfg, fseed);
  write_forecast_history(base.history, dir / (std::string("train_history_") + kBaselineArm + ".csv"));
  write_forecast_history(sga.history, dir / ("train_history_" + cfg.name + ".csv"));
  if (opts.save_checkpoints) {
    save_encoder(pre.encoder, dir / "encoder");
    save_forecaster(base.model, dir / (std::string("forecaster_") + kBaselineArm));
    save_forecaster(sga.model, dir / ("forecaster_" + cfg.name));
  }

  const WindowSource test(split.test, cfg.forecast.s, cfg.forecast.t);
  std::vector<MetricRow> rows = metric_rows(kBaselineArm, seed, evaluate(base.model, test, nullptr));
  auto more = metric_rows(cfg.name, seed, evaluate(sga.model, test, &emb));
  rows.insert(rows.end(), more.begin(), more.end());
  write_metrics_csv(rows, dir / "metrics.csv");
  return rows;
}

}  // namespace

std::vector<MetricRow> run_variant(const VariantConfig& cfg, const Dataset& data,
                                   const std::filesystem::path& out, const RunOptions& opts) {
  cfg.validate();
  if (cfg.name == kBaselineArm) {
    throw Error(ErrorKind::BadConfig, std::string("variant name '") + kBaselineArm + "' is reserved");
  }
  if (!data.speeds) throw Error(ErrorKind::MissingColumn, "dataset has no speeds.csv");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  write_text_file(out / "config.toml", format_variant_config(cfg));

  const QuotientGraph q = build_traffic_graph(data.road, data.sensors, cfg.epsilon, cfg.metric);
  write_quotient_edges_csv(q, out / "quotient_edges.csv");
  const PairSampler sampler(q, data.road, data.amenities, cfg.feature_spec());
  const TemporalSplit split = temporal_split(*data.speeds, cfg.split);

  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<MetricRow>> per_seed(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const std::uint64_t seed = cfg.seeds[i];
        per_seed[i] = run_seed(cfg, q, sampler, split, seed, out / ("seed-" + std::to_string(seed)), opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Baseline rows first, then the variant, each in seed order.
  std::vector<MetricRow> rows;
  for (const char* arm : {kBaselineArm, cfg.name.c_str()}) {
    for (const auto& seed_rows : per_seed) {
      for (const auto& r : seed_rows) {
        if (r.variant == arm) rows.push_back(r);
      }
    }
  }
  write_metrics_csv(rows, out / "metrics.csv");
  return rows;
}

}  // namespace geoctx
