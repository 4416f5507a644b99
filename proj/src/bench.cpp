#include "t3s/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace t3s {

namespace {

std::string num6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string num4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string path_field(const Json& item, const char* key, std::size_t i) {
  const auto it = item.find(key);
  if (it == item.end() || !it->is_string()) {
    throw ParseError("bench manifest: pairs[" + std::to_string(i) + "]: missing string '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::string config_label(const MetricConfig& cfg) {
  std::string s = "T3S";
  if (cfg.disable_fbd) s += " w/o FBD";
  if (cfg.disable_relation) s += " w/o Rel.";
  if (cfg.symmetric_mode) s += " (sym)";
  return s;
}

BenchManifest load_bench_manifest(const std::filesystem::path& path, const MetricConfig& base) {
  const std::filesystem::path root = path.parent_path();
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ParseError("bench manifest: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ParseError("bench manifest: document must be an object");
  const auto pairs = doc.find("pairs");
  if (pairs == doc.end() || !pairs->is_array()) throw ParseError("bench manifest: missing 'pairs' array");

  BenchManifest m;
  for (std::size_t i = 0; i < pairs->size(); ++i) {
    const Json& item = (*pairs)[i];
    if (!item.is_object()) throw ParseError("bench manifest: pairs[" + std::to_string(i) + "] is not an object");
    BenchPair p;
    p.ref = root / path_field(item, "ref", i);
    p.dist = root / path_field(item, "dist", i);
    p.ann_ref = root / path_field(item, "ann_ref", i);
    p.ann_dist = root / path_field(item, "ann_dist", i);
    p.degradation = path_field(item, "degradation", i);
    const auto lvl = item.find("level");
    if (lvl == item.end() || !lvl->is_number_integer()) {
      throw ParseError("bench manifest: pairs[" + std::to_string(i) + "]: 'level' must be an integer");
    }
    p.level = lvl->get<int>();
    if (p.level < 1 || p.level > 5) {
      throw ValidationError("bench manifest: pairs[" + std::to_string(i) + "]: level " + std::to_string(p.level) +
                            " outside [1, 5]");
    }
    m.pairs.push_back(std::move(p));
  }
  if (auto it = doc.find("embedding_table"); it != doc.end() && it->is_string()) m.embedding_table = root / it->get<std::string>();
  if (auto it = doc.find("fbd_weights"); it != doc.end() && it->is_string()) m.fbd_weights = root / it->get<std::string>();
  m.config = base;
  if (auto it = doc.find("config"); it != doc.end() && !it->is_null()) m.config = parse_metric_config(it->dump(), base);
  m.config.validate();
  return m;
}

BenchReport aggregate(const std::vector<BenchPair>& pairs, const std::vector<double>& scores,
                      std::vector<SkipRecord> skipped, std::string label) {
  BenchReport r;
  r.label = std::move(label);
  r.pair_count = pairs.size();
  r.skipped = std::move(skipped);

  std::map<std::pair<std::string, int>, GroupStats> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (std::isnan(scores[i])) continue;
    const double s = scores[i];
    GroupStats& g = groups[{pairs[i].degradation, pairs[i].level}];
    if (g.n == 0) {
      g.degradation = pairs[i].degradation;
      g.level = pairs[i].level;
      g.min = g.max = s;
    }
    ++g.n;
    g.mean += s;
    g.min = std::min(g.min, s);
    g.max = std::max(g.max, s);
  }
  std::map<std::string, std::pair<double, int>> per_deg;
  for (auto& [key, g] : groups) {
    g.mean /= g.n;
    auto& [sum, n] = per_deg[g.degradation];
    sum += g.mean;
    ++n;
    r.groups.push_back(g);
  }
  double total = 0.0;
  for (const auto& [name, v] : per_deg) {
    r.degradations.push_back({name, v.first / v.second});
    total += v.first / v.second;
  }
  r.overall = r.degradations.empty() ? 0.0 : total / static_cast<double>(r.degradations.size());
  return r;
}

BenchReport run_bench(const BenchManifest& manifest, const BenchOptions& options) {
  if (options.parallelism < 1) throw std::invalid_argument("run_bench: parallelism must be >= 1");
  const MetricConfig& cfg = manifest.config;

  std::optional<EmbeddingTable> table;
  if (!manifest.embedding_table.empty()) table = load_embedding_table(read_text_file(manifest.embedding_table)).table;
  if (!table && !cfg.disable_relation) {
    throw ValidationError("bench manifest: an embedding table is required when the relation term is enabled");
  }
  std::optional<FbdWeights> weights;
  if (!manifest.fbd_weights.empty()) weights = parse_fbd_weights(read_text_file(manifest.fbd_weights));

  const std::size_t n = manifest.pairs.size();
  std::vector<double> scores(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto score_one = [&](std::size_t i) {
    const BenchPair& p = manifest.pairs[i];
    PairInput in;
    in.ref.entities = parse_entity_set(read_text_file(p.ref));
    in.dist.entities = parse_entity_set(read_text_file(p.dist));
    in.ref.annotation = parse_annotation(read_text_file(p.ann_ref));
    in.dist.annotation = parse_annotation(read_text_file(p.ann_dist));
    const FbdWeights w = weights ? *weights : lifting_weights(in.ref.entities.feature_dim);
    return score_pair(in, w, table ? &*table : nullptr, cfg).t3s;
  };
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        scores[i] = score_one(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (!options.keep_going) stop.store(true);
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.parallelism), std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<SkipRecord> skipped;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) continue;
    if (!options.keep_going) throw BenchError(i, errors[i]);
    skipped.push_back({i, errors[i]});
  }
  return aggregate(manifest.pairs, scores, std::move(skipped), config_label(cfg));
}

std::vector<MonotoneVerdict> monotonicity_check(const BenchReport& report, double slack) {
  std::vector<MonotoneVerdict> out;
  for (const DegradationMean& d : report.degradations) {
    MonotoneVerdict v;
    v.degradation = d.degradation;
    const GroupStats* prev = nullptr;
    for (const GroupStats& g : report.groups) {
      if (g.degradation != d.degradation) continue;
      if (prev && g.mean > prev->mean + slack && v.pass) {
        v.pass = false;
        v.from_level = prev->level;
        v.to_level = g.level;
        v.rise = g.mean - prev->mean;
      }
      prev = &g;
    }
    out.push_back(v);
  }
  return out;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + s + "'");
}

std::string emit_report(const BenchReport& report, ReportFormat format, double slack) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::csv:
      os << "degradation,level,n,mean,min,max\n";
      for (const GroupStats& g : report.groups) {
        os << csv_field(g.degradation) << ',' << g.level << ',' << g.n << ',' << num6(g.mean) << ','
           << num6(g.min) << ',' << num6(g.max) << '\n';
      }
      break;
    case ReportFormat::markdown: {
      os << "| Method |";
      for (const DegradationMean& d : report.degradations) os << ' ' << d.degradation << " |";
      os << " Overall |\n|---|";
      for (std::size_t i = 0; i < report.degradations.size(); ++i) os << "---:|";
      os << "---:|\n| " << report.label << " |";
      for (const DegradationMean& d : report.degradations) os << ' ' << num4(d.mean) << " |";
      os << ' ' << num4(report.overall) << " |\n";
      break;
    }
    case ReportFormat::json: {
      Json groups = Json::array();
      for (const GroupStats& g : report.groups) {
        groups.push_back({{"degradation", g.degradation}, {"level", g.level}, {"n", g.n}, {"mean", g.mean},
                          {"min", g.min}, {"max", g.max}});
      }
      Json degs = Json::array();
      for (const DegradationMean& d : report.degradations) degs.push_back({{"degradation", d.degradation}, {"mean", d.mean}});
      Json verdicts = Json::array();
      for (const MonotoneVerdict& v : monotonicity_check(report, slack)) {
        Json j = {{"degradation", v.degradation}, {"pass", v.pass}};
        if (!v.pass) {
          j["from_level"] = v.from_level;
          j["to_level"] = v.to_level;
          j["rise"] = v.rise;
        }
        verdicts.push_back(std::move(j));
      }
      Json skipped = Json::array();
      for (const SkipRecord& s : report.skipped) skipped.push_back({{"index", s.index}, {"message", s.message}});
      const Json doc = {{"label", report.label},     {"pairs", report.pair_count}, {"groups", std::move(groups)},
                        {"degradations", std::move(degs)}, {"overall", report.overall},
                        {"monotonicity", {{"slack", slack}, {"verdicts", std::move(verdicts)}}},
                        {"skipped", std::move(skipped)}};
      os << doc.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

}  // namespace t3s
