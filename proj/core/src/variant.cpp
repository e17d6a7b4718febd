#include "geoctx/variant.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx {

EncoderConfig VariantConfig::encoder() const {
  EncoderConfig e;
  e.d_f = features;
  e.hidden_dim = hidden_dim;
  e.d_fc1 = d_fc1;
  e.d_fc2 = d_fc2;
  e.use_graphnorm = graphnorm;
  e.n_gcn_layers = gcn_layers;
  e.temperature = temperature;
  e.lr = lr;
  e.batch = pre_batch;
  e.epochs = pre_epochs;
  e.subgraph_nodes = subgraph;
  e.mean_pool = mean_pool;
  return e;
}

FeatureSpec VariantConfig::feature_spec() const { return FeatureSpec::first_n(features, amenity_radius); }

void VariantConfig::validate() const {
  if (name.empty()) throw Error(ErrorKind::BadConfig, "variant name is empty");
  if (features < 1 || features > 5) throw Error(ErrorKind::BadConfig, "features must be in 1..5");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::BadConfig, "epsilon must be > 0");
  if (seeds.empty()) throw Error(ErrorKind::BadConfig, "seed list is empty");
  encoder().validate();
  forecast.validate();
  split.validate();
  if (!dataset) city.validate();
}

namespace {

struct Value {
  enum class Kind { Bool, Number, String, List } kind;
  bool b = false;
  double num = 0.0;
  bool integral = false;
  std::string str;
  std::vector<double> list;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::BadConfig, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Value parse_value(std::string_view raw, std::size_t line) {
  Value v;
  raw = trim(raw);
  if (raw.empty()) fail(line, "missing value");
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::Bool;
    v.b = raw == "true";
    return v;
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    v.kind = Value::Kind::String;
    v.str = std::string(raw.substr(1, raw.size() - 2));
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated list");
    v.kind = Value::Kind::List;
    std::string_view body = raw.substr(1, raw.size() - 2);
    while (!trim(body).empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (!item.empty()) {
        const auto d = parse_double(item);
        if (!d) fail(line, "bad list element '" + std::string(item) + "'");
        v.list.push_back(*d);
      }
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return v;
  }
  const auto d = parse_double(raw);
  if (!d) fail(line, "cannot parse value '" + std::string(raw) + "'");
  v.kind = Value::Kind::Number;
  v.num = *d;
  v.integral = parse_int(raw).has_value();
  return v;
}

struct Reader {
  std::size_t line;
  const Value& v;
  const std::string& key;

  double number() const {
    if (v.kind != Value::Kind::Number) fail(line, key + " must be a number");
    return v.num;
  }
  std::size_t count() const {
    if (v.kind != Value::Kind::Number || !v.integral || v.num < 0) {
      fail(line, key + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v.num);
  }
  bool flag() const {
    if (v.kind != Value::Kind::Bool) fail(line, key + " must be true or false");
    return v.b;
  }
  const std::string& text() const {
    if (v.kind != Value::Kind::String) fail(line, key + " must be a quoted string");
    return v.str;
  }
};

std::string fmt(double v) { return format_double(v); }

}  // namespace

VariantConfig parse_variant_config(std::string_view text) {
  VariantConfig c;
  std::string section;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "pretrain" && section != "forecaster" && section != "run" && section != "city") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const Value v = parse_value(line.substr(eq + 1), line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!seen.emplace(full, line_no).second) fail(line_no, "duplicate key " + full);
    const Reader r{line_no, v, full};

    if (full == "name") c.name = r.text();
    else if (full == "features") c.features = r.count();
    else if (full == "epsilon") c.epsilon = r.number();
    else if (full == "subgraph") {
      if (v.kind == Value::Kind::String) {
        if (v.str != "full") fail(line_no, "subgraph must be an integer or \"full\"");
        c.subgraph = kFullSubgraph;
      } else {
        c.subgraph = r.count();
      }
    } else if (full == "hidden_dim") c.hidden_dim = r.count();
    else if (full == "lr") c.lr = r.number();
    else if (full == "graphnorm") c.graphnorm = r.flag();
    else if (full == "pretrain.epochs") c.pre_epochs = r.count();
    else if (full == "pretrain.batch") c.pre_batch = r.count();
    else if (full == "pretrain.temperature") c.temperature = r.number();
    else if (full == "pretrain.d_fc1") c.d_fc1 = r.count();
    else if (full == "pretrain.d_fc2") c.d_fc2 = r.count();
    else if (full == "pretrain.gcn_layers") c.gcn_layers = r.count();
    else if (full == "pretrain.readout") {
      if (r.text() != "root" && r.text() != "mean") fail(line_no, "readout must be \"root\" or \"mean\"");
      c.mean_pool = r.text() == "mean";
    } else if (full == "forecaster.s") c.forecast.s = r.count();
    else if (full == "forecaster.t") c.forecast.t = r.count();
    else if (full == "forecaster.d_h") c.forecast.d_h = r.count();
    else if (full == "forecaster.layers") c.forecast.n_st_layers = r.count();
    else if (full == "forecaster.epochs") c.forecast.epochs = r.count();
    else if (full == "forecaster.lr") c.forecast.lr = r.number();
    else if (full == "forecaster.batch_size") c.forecast.batch_size = r.count();
    else if (full == "forecaster.windows_per_epoch") c.forecast.windows_per_epoch = r.count();
    else if (full == "forecaster.val_windows") c.forecast.val_windows = r.count();
    else if (full == "forecaster.adaptive") c.forecast.use_adaptive_adj = r.flag();
    else if (full == "forecaster.adaptive_rank") c.forecast.adaptive_rank = r.count();
    else if (full == "run.seeds") {
      if (v.kind == Value::Kind::Number) {
        const std::size_t n = r.count();
        c.seeds.clear();
        for (std::size_t i = 1; i <= n; ++i) c.seeds.push_back(i);
      } else if (v.kind == Value::Kind::List) {
        c.seeds.clear();
        for (double s : v.list) {
          if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) fail(line_no, "seeds must be non-negative integers");
          c.seeds.push_back(static_cast<std::uint64_t>(s));
        }
      } else {
        fail(line_no, "seeds must be a count or a list");
      }
    } else if (full == "run.dataset") c.dataset = std::filesystem::path(r.text());
    else if (full == "run.train") c.split.train = r.number();
    else if (full == "run.val") c.split.val = r.number();
    else if (full == "run.test") c.split.test = r.number();
    else if (full == "run.amenity_radius") c.amenity_radius = r.number();
    else if (full == "run.metric") {
      if (r.text() == "euclidean") c.metric = DistanceMetric::Euclidean;
      else if (r.text() == "haversine") c.metric = DistanceMetric::Haversine;
      else fail(line_no, "metric must be \"euclidean\" or \"haversine\"");
    } else if (full == "city.seed") c.city.seed = r.count();
    else if (full == "city.sensors") c.city.n_sensors = r.count();
    else if (full == "city.road_nodes") c.city.n_road_nodes = r.count();
    else if (full == "city.days") c.city.days = r.count();
    else if (full == "city.dense_fraction") c.city.dense_fraction = r.number();
    else if (full == "city.missing_rate") c.city.missing_rate = r.number();
    else fail(line_no, "unknown key " + full);
  }
  c.validate();
  return c;
}

VariantConfig load_variant_config(const std::filesystem::path& path) {
  try {
    return parse_variant_config(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BadConfig) throw;
    throw Error(ErrorKind::BadConfig, path.string() + ": " + e.what());
  }
}

std::string format_variant_config(const VariantConfig& c) {
  std::ostringstream o;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "name = \"" << c.name << "\"\n";
  o << "features = " << c.features << "\n";
  o << "epsilon = " << fmt(c.epsilon) << "\n";
  if (c.subgraph == kFullSubgraph) o << "subgraph = \"full\"\n";
  else o << "subgraph = " << c.subgraph << "\n";
  o << "hidden_dim = " << c.hidden_dim << "\n";
  o << "lr = " << fmt(c.lr) << "\n";
  o << "graphnorm = " << b(c.graphnorm) << "\n";
  o << "\n[pretrain]\n";
  o << "epochs = " << c.pre_epochs << "\n";
  o << "batch = " << c.pre_batch << "\n";
  o << "temperature = " << fmt(c.temperature) << "\n";
  o << "d_fc1 = " << c.d_fc1 << "\n";
  o << "d_fc2 = " << c.d_fc2 << "\n";
  o << "gcn_layers = " << c.gcn_layers << "\n";
  o << "readout = \"" << (c.mean_pool ? "mean" : "root") << "\"\n";
  const auto& f = c.forecast;
  o << "\n[forecaster]\n";
  o << "s = " << f.s << "\n";
  o << "t = " << f.t << "\n";
  o << "d_h = " << f.d_h << "\n";
  o << "layers = " << f.n_st_layers << "\n";
  o << "epochs = " << f.epochs << "\n";
  o << "lr = " << fmt(f.lr) << "\n";
  o << "batch_size = " << f.batch_size << "\n";
  o << "windows_per_epoch = " << f.windows_per_epoch << "\n";
  o << "val_windows = " << f.val_windows << "\n";
  o << "adaptive = " << b(f.use_adaptive_adj) << "\n";
  o << "adaptive_rank = " << f.adaptive_rank << "\n";
  o << "\n[run]\n";
  o << "seeds = [";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) o << (i ? ", " : "") << c.seeds[i];
  o << "]\n";
  if (c.dataset) o << "dataset = \"" << c.dataset->generic_string() << "\"\n";
  o << "train = " << fmt(c.split.train) << "\n";
  o << "val = " << fmt(c.split.val) << "\n";
  o << "test = " << fmt(c.split.test) << "\n";
  o << "amenity_radius = " << fmt(c.amenity_radius) << "\n";
  o << "metric = \"" << (c.metric == DistanceMetric::Haversine ? "haversine" : "euclidean") << "\"\n";
  o << "\n[city]\n";
  o << "seed = " << c.city.seed << "\n";
  o << "sensors = " << c.city.n_sensors << "\n";
  o << "road_nodes = " << c.city.n_road_nodes << "\n";
  o << "days = " << c.city.days << "\n";
  o << "dense_fraction = " << fmt(c.city.dense_fraction) << "\n";
  o << "missing_rate = " << fmt(c.city.missing_rate) << "\n";
  return o.str();
}

std::vector<VariantConfig> full_grid() {
  struct Row {
    const char* name;
    std::size_t f;
    double eps;
    std::size_t n;
    std::size_t hidden;
    double lr;
    bool norm;
  };
  static constexpr Row rows[] = {
      {"features-1", 1, 0.01, 64, 320, 0.0003, true},
      {"features-2", 2, 0.01, 64, 320, 0.0003, true},
      {"features-3", 3, 0.01, 64, 320, 0.0003, true},
      {"features-4", 4, 0.01, 64, 320, 0.0003, true},
      {"features-5", 5, 0.01, 64, 320, 0.0003, true},
      {"larger-radius", 2, 0.1, 64, 320, 0.0003, true},
      {"larger-subgraph", 2, 0.01, kFullSubgraph, 320, 0.0003, true},
      {"less-hidden", 2, 0.01, 64, 64, 0.0003, true},
      {"lr-0001", 2, 0.01, 64, 320, 0.0001, true},
      {"lr-0003", 2, 0.01, 64, 320, 0.0003, true},
      {"lr-0010", 2, 0.01, 64, 320, 0.0010, true},
      {"no-graph-norm", 2, 0.01, 64, 320, 0.0003, false},
  };
  std::vector<VariantConfig> out;
  for (const Row& r : rows) {
    VariantConfig c;
    c.name = r.name;
    c.features = r.f;
    c.epsilon = r.eps;
    c.subgraph = r.n;
    c.hidden_dim = r.hidden;
    c.lr = r.lr;
    c.graphnorm = r.norm;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace geoctx
