#include "geoctx_cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "geoctx/csv.hpp"
#include "geoctx/dataset.hpp"
#include "geoctx/encoder.hpp"
#include "geoctx/error.hpp"
#include "geoctx/features.hpp"
#include "geoctx/forecaster.hpp"
#include "geoctx/osm_xml.hpp"
#include "geoctx/pipeline.hpp"
#include "geoctx/report.hpp"
#include "geoctx/road_csv.hpp"
#include "geoctx/sampler.hpp"
#include "geoctx/synthetic_city.hpp"
#include "geoctx/variant.hpp"

namespace geoctx::cli {

namespace fs = std::filesystem;

namespace {

// Relative output paths land under $GEOCTX_OUT_ROOT when it is set.
fs::path output_path(const std::string& p) {
  fs::path path(p);
  const char* root = std::getenv("GEOCTX_OUT_ROOT");
  if (path.is_relative() && root && *root) return fs::path(root) / path;
  return path;
}

DistanceMetric parse_metric(const std::string& m) {
  if (m == "euclidean") return DistanceMetric::Euclidean;
  if (m == "haversine") return DistanceMetric::Haversine;
  throw Error(ErrorKind::BadConfig, "unknown metric '" + m + "'");
}

BoundingBox parse_bbox(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto d = parse_double(item);
    if (!d) throw Error(ErrorKind::BadConfig, "bad bbox component '" + item + "'");
    v.push_back(*d);
  }
  if (v.size() != 4) throw Error(ErrorKind::BadConfig, "bbox needs min_lon,min_lat,max_lon,max_lat");
  return BoundingBox{v[0], v[1], v[2], v[3]};
}

struct ConfigSource {
  std::string config;
  std::string dataset;

  VariantConfig variant() const {
    return config.empty() ? VariantConfig{} : load_variant_config(config);
  }
  Dataset data(const VariantConfig& cfg, bool need_speeds) const {
    if (!dataset.empty()) return load_dataset(dataset, need_speeds);
    const fs::path base = config.empty() ? fs::path{} : fs::path(config).parent_path();
    return resolve_dataset(cfg, base);
  }
};

void add_source(CLI::App* cmd, ConfigSource& src) {
  cmd->add_option("--config", src.config, "Variant config (TOML-shaped)")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", src.dataset, "Dataset directory (overrides the config)")
      ->check(CLI::ExistingDirectory);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic quotient graphs, contrastive spatial pre-training and SGA forecasting"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // synth
  CityParams city;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic city dataset");
  synth->add_option("--seed", city.seed);
  synth->add_option("--sensors", city.n_sensors);
  synth->add_option("--road-nodes", city.n_road_nodes, "0 for 5 per sensor");
  synth->add_option("--days", city.days);
  synth->add_option("--dense-fraction", city.dense_fraction);
  synth->add_option("--missing-rate", city.missing_rate);
  synth->add_option("--out", synth_out)->required();

  // build-graph
  std::string bg_osm, bg_dataset, bg_sensors, bg_bbox, bg_out, bg_metric = "euclidean";
  double bg_epsilon = 0.01;
  auto* build = app.add_subcommand("build-graph", "OSM XML or road CSV to road graph and quotient graph");
  auto* osm_opt = build->add_option("--osm", bg_osm, "OSM XML file")->check(CLI::ExistingFile);
  build->add_option("--dataset", bg_dataset, "Dataset directory with nodes/edges CSV")
      ->check(CLI::ExistingDirectory)
      ->excludes(osm_opt);
  build->add_option("--sensors", bg_sensors, "sensors.csv (default: the dataset's)")->check(CLI::ExistingFile);
  build->add_option("--bbox", bg_bbox, "min_lon,min_lat,max_lon,max_lat");
  build->add_option("--epsilon", bg_epsilon, "Pruning radius in degrees");
  build->add_option("--metric", bg_metric)->check(CLI::IsMember({"euclidean", "haversine"}));
  build->add_option("--out", bg_out)->required();

  // extract-features
  ConfigSource fx_src;
  std::string fx_features, fx_nodes = "roots", fx_out;
  std::size_t fx_count = 0;
  double fx_radius = 0.005;
  bool fx_scaled = false;
  auto* extract = app.add_subcommand("extract-features", "Per-node feature matrix as CSV");
  add_source(extract, fx_src);
  extract->add_option("--features", fx_features, "Comma list of maxspeed,amenities,lanes,x,y");
  extract->add_option("-F,--first", fx_count, "First F features of the canonical order");
  extract->add_option("--radius", fx_radius, "Amenity radius in degrees");
  extract->add_option("--nodes", fx_nodes)->check(CLI::IsMember({"roots", "all"}));
  extract->add_flag("--scaled", fx_scaled, "Min-max scale over the selected rows");
  extract->add_option("--out", fx_out)->required();

  // pretrain
  ConfigSource pt_src;
  std::uint64_t pt_seed = 1;
  std::string pt_out;
  auto* pre = app.add_subcommand("pretrain", "Contrastive pre-training of the geometric encoder");
  add_source(pre, pt_src);
  pre->add_option("--seed", pt_seed);
  pre->add_option("--out", pt_out)->required();

  // train
  ConfigSource tr_src;
  std::uint64_t tr_seed = 1;
  std::string tr_emb, tr_out;
  auto* train = app.add_subcommand("train", "Train the forecaster (SGA arm when embeddings are given)");
  add_source(train, tr_src);
  train->add_option("--seed", tr_seed);
  train->add_option("--embeddings", tr_emb, "embeddings.csv from pretrain")->check(CLI::ExistingFile);
  train->add_option("--out", tr_out)->required();

  // eval
  ConfigSource ev_src;
  std::uint64_t ev_seed = 1;
  std::string ev_model, ev_emb, ev_out, ev_name;
  auto* eval = app.add_subcommand("eval", "Per-horizon test MAE of a trained forecaster");
  add_source(eval, ev_src);
  eval->add_option("--model", ev_model, "Forecaster checkpoint directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--embeddings", ev_emb)->check(CLI::ExistingFile);
  eval->add_option("--seed", ev_seed, "Seed recorded in the metrics rows");
  eval->add_option("--variant", ev_name, "Arm name recorded in the metrics rows");
  eval->add_option("--out", ev_out, "metrics CSV")->required();

  // run-variant
  ConfigSource rv_src;
  std::size_t rv_seeds = 0, rv_threads = 0;
  std::vector<std::uint64_t> rv_seed_list;
  std::string rv_out;
  bool rv_no_ckpt = false;
  auto* run = app.add_subcommand("run-variant", "Pre-train, train both arms and evaluate over seeds");
  add_source(run, rv_src);
  run->get_option("--config")->required();
  auto* seeds_opt = run->add_option("--seeds", rv_seeds, "Use seeds 1..n");
  run->add_option("--seed-list", rv_seed_list, "Explicit seeds")->excludes(seeds_opt);
  run->add_option("--threads", rv_threads, "Worker threads (0: all cores)");
  run->add_flag("--no-checkpoints", rv_no_ckpt);
  run->add_option("--out", rv_out)->required();

  // report
  std::string rp_run, rp_out;
  auto* rep = app.add_subcommand("report", "summary.csv and SVG loss curves for a run directory");
  rep->add_option("--run", rp_run)->required()->check(CLI::ExistingDirectory);
  rep->add_option("--out", rp_out, "Default: <run>/report");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*synth) {
      const fs::path dir = output_path(synth_out);
      write_dataset(dataset_from_city(generate_city(city)), dir);
      out << "wrote synthetic city to " << dir.string() << "\n";
    } else if (*build) {
      const fs::path dir = output_path(bg_out);
      std::error_code ec;
      fs::create_directories(dir, ec);
      RoadGraph road;
      std::vector<AmenityPoint> amenities;
      std::optional<SensorSet> sensors;
      if (!bg_osm.empty()) {
        std::optional<BoundingBox> bbox;
        if (!bg_bbox.empty()) bbox = parse_bbox(bg_bbox);
        OsmExtract x = parse_osm_file(bg_osm, bbox);
        road = std::move(x.road);
        amenities = std::move(x.amenities);
        write_road_csv(road, dir / "nodes.csv", dir / "edges.csv");
        write_amenities_csv(amenities, dir / "amenities.csv");
      } else if (!bg_dataset.empty()) {
        road = load_road_csv(fs::path(bg_dataset) / "nodes.csv", fs::path(bg_dataset) / "edges.csv");
        if (fs::exists(fs::path(bg_dataset) / "sensors.csv")) sensors = load_sensors(fs::path(bg_dataset) / "sensors.csv");
      } else {
        throw Error(ErrorKind::BadConfig, "build-graph needs --osm or --dataset");
      }
      if (!bg_sensors.empty()) sensors = load_sensors(bg_sensors);
      out << "road graph: " << road.nodes.size() << " nodes, " << road.edges.size() << " edges\n";
      if (sensors) {
        const QuotientGraph q = build_traffic_graph(road, *sensors, bg_epsilon, parse_metric(bg_metric));
        write_quotient_edges_csv(q, dir / "quotient_edges.csv");
        write_clusters_csv(q, road, dir / "clusters.csv");
        out << "quotient graph: " << q.size() << " nodes, " << q.edge_count() << " edges, "
            << q.isolated_nodes().size() << " isolated\n";
      }
    } else if (*extract) {
      const VariantConfig cfg = fx_src.variant();
      const Dataset data = fx_src.data(cfg, false);
      FeatureSpec spec = cfg.feature_spec();
      spec.amenity_radius = fx_radius;
      if (fx_count) spec = FeatureSpec::first_n(fx_count, fx_radius);
      if (!fx_features.empty()) {
        spec.features.clear();
        std::stringstream ss(fx_features);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto f = parse_feature(item);
          if (!f) throw Error(ErrorKind::BadConfig, "unknown feature '" + item + "'");
          spec.features.push_back(*f);
        }
      }
      std::vector<std::int64_t> ids;
      if (fx_nodes == "all") {
        for (const auto& n : data.road.nodes) ids.push_back(n.id);
      } else {
        const ClusterAssignment c = match_sensors(data.road, data.sensors, cfg.metric);
        for (std::size_t pos : c.root_of) ids.push_back(data.road.nodes[pos].id);
      }
      FeatureMatrix m = extract_raw_features(data.road, data.amenities, ids, spec);
      if (fx_scaled) m = apply_scaler(m, fit_scaler(m));
      write_feature_csv(m, output_path(fx_out));
      out << "wrote " << m.values.rows() << " x " << m.values.cols() << " features\n";
    } else if (*pre) {
      const VariantConfig cfg = pt_src.variant();
      const Dataset data = pt_src.data(cfg, false);
      const QuotientGraph q = build_traffic_graph(data.road, data.sensors, cfg.epsilon, cfg.metric);
      const PairSampler sampler(q, data.road, data.amenities, cfg.feature_spec());
      const NodeSplit split = split_nodes(q.size(), split_seed(pt_seed, 100));
      const PretrainResult r = pretrain(sampler, cfg.encoder(), split, split_seed(pt_seed, 101));
      const fs::path dir = output_path(pt_out);
      save_encoder(r.encoder, dir / "encoder");
      write_loss_history(r.history, dir / "pretrain_history.csv");
      write_embeddings_csv(embed_all(r.encoder, sampler, split_seed(pt_seed, 102)), q.sensors,
                           dir / "embeddings.csv");
      out << "best val loss " << format_double(r.best_val_loss) << " at epoch " << r.best_epoch << "\n";
    } else if (*train) {
      const VariantConfig cfg = tr_src.variant();
      const Dataset data = tr_src.data(cfg, true);
      const QuotientGraph q = build_traffic_graph(data.road, data.sensors, cfg.epsilon, cfg.metric);
      const TemporalSplit split = temporal_split(*data.speeds, cfg.split);
      ForecastConfig fc = cfg.forecast;
      std::optional<nn::Tensor2> emb;
      if (!tr_emb.empty()) emb = read_embeddings_csv(tr_emb, q.sensors);
      fc.use_sga = emb.has_value();
      const TrainResult r = train_forecaster(split.train, split.val, q, emb ? &*emb : nullptr, fc,
                                             split_seed(tr_seed, 103));
      const fs::path dir = output_path(tr_out);
      save_forecaster(r.model, dir / "forecaster");
      write_forecast_history(r.history, dir / "train_history.csv");
      out << "best val MAE " << format_double(r.best_val_mae) << " at epoch " << r.best_epoch << "\n";
    } else if (*eval) {
      const VariantConfig cfg = ev_src.variant();
      const Dataset data = ev_src.data(cfg, true);
      const QuotientGraph q = build_traffic_graph(data.road, data.sensors, cfg.epsilon, cfg.metric);
      const Forecaster model = load_forecaster(ev_model, q);
      const TemporalSplit split = temporal_split(*data.speeds, cfg.split);
      std::optional<nn::Tensor2> emb;
      if (!ev_emb.empty()) emb = read_embeddings_csv(ev_emb, q.sensors);
      const WindowSource test(split.test, model.config().s, model.config().t);
      const HorizonMae m = evaluate(model, test, emb ? &*emb : nullptr);
      const std::string arm = !ev_name.empty() ? ev_name : (model.config().use_sga ? cfg.name : kBaselineArm);
      std::vector<MetricRow> rows;
      for (std::size_t k = 0; k < m.per_step.size(); ++k) {
        rows.push_back({arm, ev_seed, std::to_string(k + 1), m.per_step[k]});
      }
      rows.push_back({arm, ev_seed, "all", m.all});
      write_metrics_csv(rows, output_path(ev_out));
      out << "all-steps MAE " << format_double(m.all) << "\n";
    } else if (*run) {
      VariantConfig cfg = rv_src.variant();
      if (rv_seeds) {
        cfg.seeds.clear();
        for (std::size_t i = 1; i <= rv_seeds; ++i) cfg.seeds.push_back(i);
      }
      if (!rv_seed_list.empty()) cfg.seeds = rv_seed_list;
      const Dataset data = rv_src.data(cfg, true);
      RunOptions opts;
      opts.threads = rv_threads;
      opts.save_checkpoints = !rv_no_ckpt;
      const fs::path dir = output_path(rv_out);
      const auto rows = run_variant(cfg, data, dir, opts);
      for (const auto& s : summarize(rows)) {
        if (s.horizon_step == "all") {
          out << s.variant << ": mean all-steps MAE " << format_double(s.mean_mae) << " over "
              << s.n_seeds << " seeds\n";
        }
      }
    } else if (*rep) {
      const fs::path dir = rp_run;
      const fs::path dest = rp_out.empty() ? dir / "report" : output_path(rp_out);
      const auto rows = report(dir, dest);
      out << "wrote " << rows.size() << " summary rows to " << (dest / "summary.csv").string() << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace geoctx::cli
