#include "sarslide/experiments/report.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "sarslide/errors.hpp"
#include "sarslide/experiments/plot.hpp"
#include "sarslide/io_util.hpp"

namespace sarslide::experiments {

namespace fs = std::filesystem;
using nlohmann::json;

const char* code_version() noexcept { return SARSLIDE_VERSION; }

RowMetrics row_metrics(const metrics::MetricsReport& r) {
  RowMetrics m;
  m.aprc = r.aprc;
  m.aprc_error = r.run_aprc.error;
  m.aprc_random_baseline = r.aprc_random_baseline;
  m.median_dl1_all = r.median_dl1_all;
  m.dl1_all_error = r.run_dl1_all.error;
  m.median_dcount_empty = r.median_dcount_empty;
  if (r.run_dcount_empty) m.dcount_empty_error = r.run_dcount_empty->error;
  m.median_dcount_landslide = r.median_dcount_landslide;
  if (r.run_dcount_landslide) m.dcount_landslide_error = r.run_dcount_landslide->error;
  return m;
}

bool ResultsTable::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResultsRow& r) { return r.complete(); });
}

namespace {

constexpr const char* kHeader =
    "variant,train_size,seeds,checkpoints,status,aprc,aprc_error,aprc_random_baseline,median_dl1_all,dl1_all_error,"
    "median_dcount_empty,dcount_empty_error,median_dcount_landslide,dcount_landslide_error,note";

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return fmt(*v);
  } else {
    return std::to_string(*v);
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_num(const std::string& s, const char* field) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string("results.csv: bad ") + field + " '" + s + "'");
  }
  return v;
}

template <typename T>
std::optional<T> parse_opt(const std::string& s, const char* field) {
  if (s.empty()) return std::nullopt;
  return parse_num<T>(s, field);
}

}  // namespace

std::string results_csv(const ResultsTable& table) {
  std::ostringstream out;
  out << kHeader << "\n";
  for (const auto& r : table.rows) {
    std::string seeds;
    for (std::size_t i = 0; i < r.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(r.seeds[i]);
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out << r.variant << ',' << r.train_size << ',' << seeds << ',' << r.checkpoints << ','
        << (r.complete() ? "complete" : "incomplete") << ',';
    if (r.metrics) {
      const RowMetrics& m = *r.metrics;
      out << fmt(m.aprc) << ',' << fmt(m.aprc_error) << ',' << fmt(m.aprc_random_baseline) << ',' << m.median_dl1_all
          << ',' << fmt(m.dl1_all_error) << ',' << fmt_opt(m.median_dcount_empty) << ','
          << fmt_opt(m.dcount_empty_error) << ',' << fmt_opt(m.median_dcount_landslide) << ','
          << fmt_opt(m.dcount_landslide_error);
    } else {
      out << ",,,,,,,,";
    }
    out << ',' << note << "\n";
  }
  return out.str();
}

ResultsTable parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw FormatError("results.csv: unexpected header");
  ResultsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 15) throw FormatError("results.csv: expected 15 fields, got " + std::to_string(f.size()));
    ResultsRow r;
    r.variant = f[0];
    r.train_size = parse_num<int>(f[1], "train_size");
    if (!f[2].empty()) {
      for (const auto& s : split(f[2], ';')) r.seeds.push_back(parse_num<std::uint64_t>(s, "seed"));
    }
    r.checkpoints = parse_num<int>(f[3], "checkpoints");
    if (f[4] == "complete") {
      RowMetrics m;
      m.aprc = parse_num<double>(f[5], "aprc");
      m.aprc_error = parse_num<double>(f[6], "aprc_error");
      m.aprc_random_baseline = parse_num<double>(f[7], "aprc_random_baseline");
      m.median_dl1_all = parse_num<std::int64_t>(f[8], "median_dl1_all");
      m.dl1_all_error = parse_num<double>(f[9], "dl1_all_error");
      m.median_dcount_empty = parse_opt<std::int64_t>(f[10], "median_dcount_empty");
      m.dcount_empty_error = parse_opt<double>(f[11], "dcount_empty_error");
      m.median_dcount_landslide = parse_opt<std::int64_t>(f[12], "median_dcount_landslide");
      m.dcount_landslide_error = parse_opt<double>(f[13], "dcount_landslide_error");
      r.metrics = m;
    } else if (f[4] != "incomplete") {
      throw FormatError("results.csv: bad status '" + f[4] + "'");
    }
    r.note = f[14];
    table.rows.push_back(std::move(r));
  }
  return table;
}

json provenance_json(const ResultsTable& table, const json& config) {
  json seeds = json::object();
  json gaps = json::array();
  for (const auto& r : table.rows) {
    seeds[r.variant][std::to_string(r.train_size)] = r.seeds;
    if (!r.complete()) gaps.push_back({{"variant", r.variant}, {"train_size", r.train_size}, {"note", r.note}});
  }
  return {
      {"config", config},
      {"config_sha256", sha256_hex(config.dump())},
      {"seeds", seeds},
      {"code_version", code_version()},
      {"gaps", gaps},
  };
}

ReportFiles emit_report(const ResultsTable& table, const fs::path& outdir, const json& config) {
  if (table.rows.empty()) throw DataError("results table is empty");
  fs::create_directories(outdir / "report");
  ReportFiles files;
  files.csv = outdir / "results.csv";
  write_text_file(files.csv, results_csv(table));

  std::vector<int> sizes;
  std::vector<std::string> variants;
  for (const auto& r : table.rows) {
    if (std::find(sizes.begin(), sizes.end(), r.train_size) == sizes.end()) sizes.push_back(r.train_size);
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
  }
  std::sort(sizes.begin(), sizes.end());

  struct Panel {
    const char* file;
    const char* title;
    const char* y_label;
    std::optional<double> (*value)(const RowMetrics&);
    double (*error)(const RowMetrics&);
  };
  const Panel panels[] = {
      {"aprc.png", "APRC", "APRC", [](const RowMetrics& m) { return std::optional<double>(m.aprc); },
       [](const RowMetrics& m) { return m.aprc_error; }},
      {"dl1_all.png", "MEDIAN DL1, ALL CHIPS", "PIXELS",
       [](const RowMetrics& m) { return std::optional<double>(static_cast<double>(m.median_dl1_all)); },
       [](const RowMetrics& m) { return m.dl1_all_error; }},
      {"dcount_empty.png", "MEDIAN DCOUNT, EMPTY CHIPS", "PIXELS",
       [](const RowMetrics& m) {
         return m.median_dcount_empty ? std::optional<double>(static_cast<double>(*m.median_dcount_empty))
                                      : std::nullopt;
       },
       [](const RowMetrics& m) { return m.dcount_empty_error.value_or(0.0); }},
      {"dcount_landslide.png", "MEDIAN DCOUNT, LANDSLIDE CHIPS", "PIXELS",
       [](const RowMetrics& m) {
         return m.median_dcount_landslide ? std::optional<double>(static_cast<double>(*m.median_dcount_landslide))
                                          : std::nullopt;
       },
       [](const RowMetrics& m) { return m.dcount_landslide_error.value_or(0.0); }},
  };

  for (const Panel& p : panels) {
    Chart chart;
    chart.title = p.title;
    chart.y_label = p.y_label;
    for (int s : sizes) chart.x_labels.push_back(std::to_string(s));
    for (const auto& v : variants) {
      Series series;
      series.name = v;
      series.y.assign(sizes.size(), std::nullopt);
      series.error.assign(sizes.size(), 0.0);
      for (const auto& r : table.rows) {
        if (r.variant != v || !r.metrics) continue;
        const auto i = static_cast<std::size_t>(std::find(sizes.begin(), sizes.end(), r.train_size) - sizes.begin());
        series.y[i] = p.value(*r.metrics);
        series.error[i] = p.error(*r.metrics);
      }
      chart.series.push_back(std::move(series));
    }
    const fs::path path = outdir / "report" / p.file;
    write_chart_png(chart, path);
    files.plots.push_back(path);
  }

  files.provenance = outdir / "provenance.json";
  write_text_file(files.provenance, provenance_json(table, config).dump(2) + "\n");
  return files;
}

}  // namespace sarslide::experiments
