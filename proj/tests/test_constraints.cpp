#include "support.hpp"

#include "t3s/constraints.hpp"

#include <doctest.h>

using namespace t3s;

namespace {

ScoreFn t3s_fn() {
  return [](const PairInput& p) {
    return score_pair(p, lifting_weights(p.ref.entities.feature_dim), &synth_vocab().table, {});
  };
}

const CheckResult& find(const ConstraintReport& r, const std::string& name) {
  for (const CheckResult& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check " + name);
}

}  // namespace

TEST_SUITE("constraints") {

TEST_CASE("zero perturbation gives a perfect invariance statistic") {
  std::vector<Scenario> suite;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Scenario sc = perturb_noise(gen_scene(s, SceneOptions{}), 0.0, s);
    sc.group = "c1";
    suite.push_back(std::move(sc));
  }
  const ConstraintReport r = check_constraints(score_scenarios(suite, t3s_fn()));
  const CheckResult& c1 = find(r, "c1_invariance");
  CHECK(c1.evaluated);
  CHECK(c1.pass);
  CHECK(c1.stats["mean"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(find(r, "c2_entity_sensitivity").evaluated);
  CHECK(r.all_pass());
}

TEST_CASE("default suite passes every check") {
  SuiteParams p;
  p.seeds = 20;
  p.fuzz_pairs = 100;
  std::vector<Scenario> suite = constraint_suite(p, 1);
  std::vector<Scenario> three = three_level_suite(p, 1);
  suite.insert(suite.end(), three.begin(), three.end());
  const ConstraintReport r = check_constraints(score_scenarios(suite, t3s_fn()));
  for (const CheckResult& c : r.checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.evaluated);
    CHECK(c.pass);
  }
  CHECK(r.to_json()["all_pass"].get<bool>());
}

TEST_CASE("full unrelated shift drops below the unshifted score") {
  const Scene s = gen_scene(4, SceneOptions{});
  const Scenario base = perturb_entity_shift(s, 0, ShiftDistance::unrelated, 4);
  const Scenario all = perturb_entity_shift(s, 5, ShiftDistance::unrelated, 4);
  const ScoreFn fn = t3s_fn();
  CHECK(fn(all.pair).t3s < fn(base.pair).t3s);
}

TEST_CASE("entity-blind stub is caught") {
  SuiteParams p;
  p.seeds = 5;
  p.fuzz_pairs = 10;
  const ConstraintReport r = check_constraints(score_scenarios(constraint_suite(p, 2), ignore_entities_stub));
  CHECK_FALSE(find(r, "c2_entity_sensitivity").pass);
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("range check flags errors and out-of-range values") {
  std::vector<ScoredScenario> rows(3);
  rows[0].report.t3s = 0.5;
  rows[1].report.t3s = 1.5;
  rows[2].error = "boom";
  const CheckResult c = check_range(rows);
  CHECK_FALSE(c.pass);
  CHECK(c.stats["out_of_range"] == 1);
  CHECK(c.stats["errors"] == 1);

  const std::vector<ScoredScenario> nan_row(1, ScoredScenario{"c4", {}, 0, {}, 0, 0, {}, {}});
  std::vector<ScoredScenario> bad = nan_row;
  bad[0].report.alpha_rel = std::nan("");
  CHECK_FALSE(check_range(bad).pass);

  const std::vector<Scenario> none;
  CHECK_FALSE(check_constraints(score_scenarios(none, t3s_fn())).all_pass());
}

TEST_CASE("monotone check reports the rising transition") {
  std::vector<ScoredScenario> rows;
  for (int k = 0; k <= 2; ++k) {
    ScoredScenario s;
    s.group = "c2";
    s.kind = ScenarioKind::entity_shift;
    s.magnitude = k;
    s.population = 2;
    s.report.t3s = k == 1 ? 0.2 : (k == 2 ? 0.3 : 1.0);
    rows.push_back(s);
  }
  const CheckResult c = check_entity_sensitivity(rows, {});
  CHECK_FALSE(c.pass);
  CHECK(c.detail.find("k=1 to k=2") != std::string::npos);
}

TEST_CASE("ablation sensitivity statistic") {
  std::vector<ScoredScenario> rows;
  auto add = [&](ScenarioKind kind, double k, double t) {
    ScoredScenario s;
    s.group = "ablation";
    s.kind = kind;
    s.magnitude = k;
    s.seed = 1;
    s.report.t3s = t;
    rows.push_back(s);
  };
  add(ScenarioKind::entity_shift, 0, 1.0);
  add(ScenarioKind::entity_shift, 1, 0.6);
  add(ScenarioKind::entity_shift, 2, 0.2);
  add(ScenarioKind::relation_shift, 0, 0.9);
  add(ScenarioKind::relation_shift, 1, 0.8);
  const Sensitivity s = ablation_sensitivity(rows);
  CHECK(s.entity == doctest::Approx(0.6));
  CHECK(s.relation == doctest::Approx(0.1));
}

}  // TEST_SUITE
