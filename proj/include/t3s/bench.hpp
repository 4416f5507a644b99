#pragma once

// Benchmark harness: scores manifests of reference/distorted pairs grouped by
// degradation type and severity level.

#include "t3s/io.hpp"
#include "t3s/scorer.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace t3s {

struct BenchPair {
  std::filesystem::path ref, dist, ann_ref, ann_dist;
  std::string degradation;
  int level = 1;
};

struct BenchManifest {
  std::vector<BenchPair> pairs;
  std::filesystem::path embedding_table;  // empty when absent
  std::filesystem::path fbd_weights;      // empty selects lifting weights
  MetricConfig config;
};

/// Paths in the manifest are relative to its directory. `base` supplies the
/// config defaults the manifest's "config" object overrides.
BenchManifest load_bench_manifest(const std::filesystem::path& path, const MetricConfig& base = {});

/// A pair failed to load or score and keep_going was off.
class BenchError : public std::runtime_error {
 public:
  BenchError(std::size_t index, const std::string& what)
      : std::runtime_error("pair " + std::to_string(index) + ": " + what), index(index) {}
  std::size_t index;
};

struct BenchOptions {
  int parallelism = 1;
  bool keep_going = false;
};

struct GroupStats {
  std::string degradation;
  int level = 0;
  int n = 0;
  double mean = 0.0, min = 0.0, max = 0.0;
};

struct DegradationMean {
  std::string degradation;
  double mean = 0.0;  // mean of the per-level means
};

struct SkipRecord {
  std::size_t index = 0;
  std::string message;
};

struct BenchReport {
  std::string label;               // configuration name used as the table row
  std::vector<GroupStats> groups;  // sorted by degradation, then level
  std::vector<DegradationMean> degradations;
  double overall = 0.0;            // mean over degradations
  std::size_t pair_count = 0;
  std::vector<SkipRecord> skipped;
};

/// Pairs are scored concurrently; aggregation runs over results in manifest
/// order, so the report does not depend on parallelism.
BenchReport run_bench(const BenchManifest& manifest, const BenchOptions& options = {});

/// Aggregates precomputed scores (NaN marks a skipped pair).
BenchReport aggregate(const std::vector<BenchPair>& pairs, const std::vector<double>& scores,
                      std::vector<SkipRecord> skipped, std::string label);

struct MonotoneVerdict {
  std::string degradation;
  bool pass = true;
  int from_level = 0;  // first offending transition when !pass
  int to_level = 0;
  double rise = 0.0;
};

inline constexpr double kDefaultSlack = 0.02;

/// Pass when mean(level l+1) <= mean(level l) + slack for every adjacent pair of present levels.
std::vector<MonotoneVerdict> monotonicity_check(const BenchReport& report, double slack = kDefaultSlack);

enum class ReportFormat { csv, markdown, json };
ReportFormat parse_report_format(const std::string& s);

std::string emit_report(const BenchReport& report, ReportFormat format, double slack = kDefaultSlack);

std::string config_label(const MetricConfig& cfg);

}  // namespace t3s
