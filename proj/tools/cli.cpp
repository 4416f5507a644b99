#include "cli.hpp"

#include "t3s/bench.hpp"
#include "t3s/constraints.hpp"
#include "t3s/io.hpp"
#include "t3s/scorer.hpp"
#include "t3s/synth.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <optional>

namespace t3s::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

MetricConfig base_config(const std::string& config_path) {
  MetricConfig cfg;
  if (const char* env = std::getenv("T3S_CONFIG"); env && *env) cfg = parse_metric_config(read_text_file(env), cfg);
  if (!config_path.empty()) cfg = parse_metric_config(read_text_file(config_path), cfg);
  return cfg;
}

struct ScoreArgs {
  std::string ref, dist, ann_ref, ann_dist, embeddings, fbd, config;
  std::string format = "json";
  bool symmetric = false, no_fbd = false, no_relation = false;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  MetricConfig cfg = base_config(a.config);
  cfg.symmetric_mode |= a.symmetric;
  cfg.disable_fbd |= a.no_fbd;
  cfg.disable_relation |= a.no_relation;

  if (!cfg.disable_relation) {
    if (a.embeddings.empty()) throw UsageError("--embeddings is required unless --no-relation is given");
    if (a.ann_ref.empty() || a.ann_dist.empty()) {
      throw UsageError("--ann-ref and --ann-dist are required unless --no-relation is given");
    }
  }
  if (!cfg.disable_fbd && a.fbd.empty()) throw UsageError("--fbd is required unless --no-fbd is given");
  if ((a.ann_ref.empty()) != (a.ann_dist.empty())) throw UsageError("--ann-ref and --ann-dist go together");

  PairInput pair;
  pair.ref.entities = parse_entity_set(read_text_file(a.ref));
  pair.dist.entities = parse_entity_set(read_text_file(a.dist));
  if (!a.ann_ref.empty()) {
    pair.ref.annotation = parse_annotation(read_text_file(a.ann_ref));
    pair.dist.annotation = parse_annotation(read_text_file(a.ann_dist));
  }
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = load_embedding_table(read_text_file(a.embeddings)).table;
  const FbdWeights w = a.fbd.empty() ? lifting_weights(pair.ref.entities.feature_dim)
                                     : parse_fbd_weights(read_text_file(a.fbd));

  const ScoreReport r = score_pair(pair, w, table ? &*table : nullptr, cfg);
  if (a.format == "csv") {
    out << score_report_csv_header() << '\n' << score_report_csv_row(r) << '\n';
  } else {
    out << score_report_to_json(r).dump(2) << '\n';
  }
  return kExitOk;
}

struct BenchArgs {
  std::string manifest, out_path;
  std::string format = "json";
  int parallel = 1;
  double slack = kDefaultSlack;
  bool require_monotone = false, keep_going = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const BenchManifest m = load_bench_manifest(a.manifest, base_config(""));
  const BenchReport report = run_bench(m, {a.parallel, a.keep_going});
  const std::string text = emit_report(report, parse_report_format(a.format), a.slack);
  if (a.out_path.empty()) {
    out << text;
  } else {
    write_text_file(a.out_path, text);
  }
  for (const SkipRecord& s : report.skipped) err << "skipped pair " << s.index << ": " << s.message << '\n';

  bool monotone = true;
  for (const MonotoneVerdict& v : monotonicity_check(report, a.slack)) {
    if (v.pass) continue;
    monotone = false;
    err << "non-monotone: " << v.degradation << " level " << v.from_level << " -> " << v.to_level << " rises by "
        << v.rise << '\n';
  }
  return a.require_monotone && !monotone ? kExitData : kExitOk;
}

struct SynthArgs {
  std::string suite = "constraints", out_dir;
  std::uint64_t seed = 1;
  int seeds = 100;
  int fuzz = 500;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SuiteParams p;
  p.seeds = a.seeds;
  p.fuzz_pairs = a.fuzz;
  std::filesystem::path manifest;
  if (a.suite == "constraints") {
    std::vector<Scenario> s = constraint_suite(p, a.seed);
    std::vector<Scenario> t = three_level_suite(p, a.seed);
    s.insert(s.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    manifest = write_suite(s, a.out_dir);
  } else if (a.suite == "three-level") {
    manifest = write_suite(three_level_suite(p, a.seed), a.out_dir);
  } else if (a.suite == "ablation") {
    manifest = write_suite(ablation_suite(p, a.seed), a.out_dir);
  } else if (a.suite == "bench") {
    manifest = write_degradation_bench(a.seeds, a.seed, a.out_dir);
  } else {
    write_fbd_training_data(fbd_training_data(a.seeds, 10, SceneOptions{}.dim, a.seed), a.out_dir);
    manifest = std::filesystem::path(a.out_dir) / "labels.json";
  }
  out << manifest.string() << '\n';
  return kExitOk;
}

struct ValidateArgs {
  std::string suite, report, config;
  std::string metric = "t3s";
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const LoadedSuite suite = load_suite(a.suite);
  const MetricConfig cfg = base_config(a.config);
  cfg.validate();
  ScoreFn fn;
  if (a.metric == "ignore-entities") {
    fn = ignore_entities_stub;
  } else {
    fn = [&](const PairInput& p) { return score_pair(p, suite.weights, &suite.table, cfg); };
  }
  const ConstraintReport report = check_constraints(score_scenarios(suite.scenarios, fn));
  for (const CheckResult& c : report.checks) {
    out << (c.evaluated ? (c.pass ? "PASS " : "FAIL ") : "SKIP ") << c.name << ": " << c.detail << '\n';
  }
  if (!a.report.empty()) write_text_file(a.report, report.to_json().dump(2) + "\n");
  return report.all_pass() ? kExitOk : kExitData;
}

struct FitArgs {
  std::string train, labels, out_path;
  int epochs = 200;
  double lr = 0.5;
  std::uint64_t seed = 0;
  long latent = 0;
};

int cmd_fbd_fit(const FitArgs& a, std::ostream& out) {
  const std::vector<LabeledSet> data = load_labeled_sets(a.train, parse_fg_labels(read_text_file(a.labels)));
  if (data.empty()) throw ValidationError("no entity-set files in '" + a.train + "'");
  FitOptions opt;
  opt.epochs = a.epochs;
  opt.learning_rate = a.lr;
  opt.latent_dim = a.latent;
  const FitResult r = fit(data, opt, a.seed);
  write_text_file(a.out_path, serialize_fbd_weights(r.weights));

  int correct = 0, total = 0;
  for (const LabeledSet& ls : data) {
    const Vector p = decouple(ls.set, r.weights).p;
    for (std::size_t i = 0; i < ls.labels.size(); ++i) {
      correct += (p[static_cast<Eigen::Index>(i)] >= 0.5) == (ls.labels[i] == 1);
      ++total;
    }
  }
  const Json summary = {{"epochs", a.epochs},
                        {"initial_loss", r.loss_history.front()},
                        {"final_loss", r.loss_history.back()},
                        {"rejected_steps", r.rejected_steps},
                        {"final_learning_rate", r.final_learning_rate},
                        {"train_accuracy", static_cast<double>(correct) / total},
                        {"weights", a.out_path}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"T3S semantic-similarity scoring engine", "t3s"};
  app.require_subcommand(1);

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score one reference/distorted pair");
  score->add_option("--ref", sa.ref, "Reference entity set")->required()->check(CLI::ExistingFile);
  score->add_option("--dist", sa.dist, "Distorted entity set")->required()->check(CLI::ExistingFile);
  score->add_option("--ann-ref", sa.ann_ref, "Reference annotation")->check(CLI::ExistingFile);
  score->add_option("--ann-dist", sa.ann_dist, "Distorted annotation")->check(CLI::ExistingFile);
  score->add_option("--embeddings", sa.embeddings, "word2vec text table")->check(CLI::ExistingFile);
  score->add_option("--fbd", sa.fbd, "FBD weights JSON")->check(CLI::ExistingFile);
  score->add_option("--config", sa.config, "MetricConfig JSON")->check(CLI::ExistingFile);
  score->add_option("--format", sa.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  score->add_flag("--symmetric", sa.symmetric, "Average both directions");
  score->add_flag("--no-fbd", sa.no_fbd, "Score raw features without decoupling");
  score->add_flag("--no-relation", sa.no_relation, "Drop the relation term");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a degradation benchmark manifest");
  bench->add_option("--manifest", ba.manifest, "Bench manifest JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--parallel", ba.parallel, "Worker threads")->check(CLI::Range(1, 1024));
  bench->add_option("--out", ba.out_path, "Report path (stdout when omitted)");
  bench->add_option("--format", ba.format, "Report format")->check(CLI::IsMember({"csv", "markdown", "json"}));
  bench->add_option("--slack", ba.slack, "Monotonicity slack")->check(CLI::NonNegativeNumber);
  bench->add_flag("--require-monotone", ba.require_monotone, "Exit 1 when any degradation is non-monotone");
  bench->add_flag("--keep-going", ba.keep_going, "Skip unreadable pairs instead of aborting");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic suite");
  synth->add_option("--suite", ya.suite, "Suite kind")
      ->check(CLI::IsMember({"constraints", "three-level", "ablation", "bench", "fbd-train"}));
  synth->add_option("--seed", ya.seed, "Base seed");
  synth->add_option("--seeds", ya.seeds, "Scenes per suite")->check(CLI::PositiveNumber);
  synth->add_option("--fuzz", ya.fuzz, "Range-fuzz pairs")->check(CLI::NonNegativeNumber);
  synth->add_option("--out", ya.out_dir, "Output directory")->required();

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check the metric constraints on a suite");
  validate->add_option("--suite", va.suite, "Suite directory or manifest")->required()->check(CLI::ExistingPath);
  validate->add_option("--report", va.report, "Write the constraint report JSON here");
  validate->add_option("--config", va.config, "MetricConfig JSON")->check(CLI::ExistingFile);
  validate->add_option("--metric", va.metric, "Metric under test")->check(CLI::IsMember({"t3s", "ignore-entities"}));

  FitArgs fa;
  auto* fbd_fit = app.add_subcommand("fbd-fit", "Train FBD weights on labeled entity sets");
  fbd_fit->add_option("--train", fa.train, "Directory of entity-set files")->required()->check(CLI::ExistingDirectory);
  fbd_fit->add_option("--labels", fa.labels, "fg/bg labels JSON")->required()->check(CLI::ExistingFile);
  fbd_fit->add_option("--epochs", fa.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  fbd_fit->add_option("--lr", fa.lr, "Learning rate")->check(CLI::PositiveNumber);
  fbd_fit->add_option("--seed", fa.seed, "Initialization seed");
  fbd_fit->add_option("--latent", fa.latent, "Latent width (0 = twice the input width)")->check(CLI::NonNegativeNumber);
  fbd_fit->add_option("--out", fa.out_path, "Output weights JSON")->required();

  std::vector<const char*> argv{"t3s"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score) return cmd_score(sa, out);
    if (*bench) return cmd_bench(ba, out, err);
    if (*synth) return cmd_synth(ya, out);
    if (*validate) return cmd_validate(va, out);
    if (*fbd_fit) return cmd_fbd_fit(fa, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace t3s::cli
