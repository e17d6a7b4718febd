#include "geoctx/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx {

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  std::set<std::tuple<std::string, std::uint64_t, std::string>> seen;
  for (const auto& r : rows) {
    if (!seen.emplace(r.variant, r.seed, r.horizon_step).second) continue;
    const auto key = std::make_pair(r.variant, r.horizon_step);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(r.mae);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& v = groups[key];
    SummaryRow s;
    s.variant = key.first;
    s.horizon_step = key.second;
    s.n_seeds = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean_mae = sum / static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean_mae) * (x - s.mean_mae);
    s.std_mae = std::sqrt(sq / static_cast<double>(v.size()));
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"variant", "horizon_step", "n_seeds", "mean_mae", "std_mae"};
  for (const auto& r : rows) {
    t.rows.push_back({r.variant, r.horizon_step, std::to_string(r.n_seeds), format_double(r.mean_mae),
                      format_double(r.std_mae)});
  }
  write_csv(path, t);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double xv = x0 + (x1 - x0) * k / 4.0;
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << num(xv)
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">epoch</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 5];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(si);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<SummaryRow> report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(run_dir)) {
    throw Error(ErrorKind::MissingRunArtifacts, run_dir.string() + " is not a directory");
  }
  std::vector<fs::path> runs;
  if (fs::exists(run_dir / "metrics.csv")) runs.push_back(run_dir);
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv") &&
        entry.path().filename().string().rfind("seed-", 0) != 0) {
      subdirs.push_back(entry.path());
    }
  }
  std::sort(subdirs.begin(), subdirs.end());
  runs.insert(runs.end(), subdirs.begin(), subdirs.end());
  if (runs.empty()) {
    throw Error(ErrorKind::MissingRunArtifacts, "no metrics.csv under " + run_dir.string());
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::vector<MetricRow> rows;
  for (const auto& r : runs) {
    auto more = read_metrics_csv(r / "metrics.csv");
    rows.insert(rows.end(), more.begin(), more.end());
  }
  const auto summary = summarize(rows);
  write_summary_csv(summary, out_dir / "summary.csv");

  for (const auto& r : runs) {
    std::vector<fs::path> seed_dirs;
    for (const auto& entry : fs::directory_iterator(r)) {
      if (entry.is_directory() && entry.path().filename().string().rfind("seed-", 0) == 0) {
        seed_dirs.push_back(entry.path());
      }
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    for (const auto& sd : seed_dirs) {
      std::vector<fs::path> histories;
      for (const auto& entry : fs::directory_iterator(sd)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.find("history") != std::string::npos &&
            entry.path().extension() == ".csv") {
          histories.push_back(entry.path());
        }
      }
      std::sort(histories.begin(), histories.end());
      for (const auto& h : histories) {
        const CsvTable t = read_csv(h);
        t.require_header({"epoch", "train_loss", "val_loss"}, h.string());
        Series train{"train", {}, {}}, val{"val", {}, {}};
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          const double e = parse_double_cell(t.rows[i][0], i + 1, "epoch");
          train.x.push_back(e);
          val.x.push_back(e);
          train.y.push_back(parse_double_cell(t.rows[i][1], i + 1, "train_loss"));
          val.y.push_back(parse_double_cell(t.rows[i][2], i + 1, "val_loss"));
        }
        std::string prefix = r == run_dir ? "" : r.filename().string() + "_";
        const std::string stem = prefix + sd.filename().string() + "_" + h.stem().string();
        write_text_file(out_dir / (stem + ".svg"), line_chart_svg(stem, {train, val}));
      }
    }
  }
  return summary;
}

}  // namespace geoctx
