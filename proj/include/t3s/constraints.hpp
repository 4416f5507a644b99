#pragma once

// Executable versions of the four metric constraints plus the three-level
// ordering and ablation-direction checks, evaluated over scored scenarios.

#include "t3s/io.hpp"
#include "t3s/scorer.hpp"
#include "t3s/synth.hpp"

#include <string>
#include <vector>

namespace t3s {

struct ConstraintThresholds {
  double c1_min = 0.90;
  double c1_mean = 0.95;
  double c2_ratio = 0.2;
  double c3_full_shift_bound = 2.0 / 3.0;
  double ordering_fraction = 0.95;
  double monotone_tol = 1e-12;
};

struct ScoredScenario {
  std::string group;
  ScenarioKind kind = ScenarioKind::noise;
  double magnitude = 0.0;
  ShiftDistance distance = ShiftDistance::unrelated;
  int population = 0;
  std::uint64_t seed = 0;
  ScoreReport report;
  std::string error;  // non-empty when scoring threw
};

std::vector<ScoredScenario> score_scenarios(const std::vector<Scenario>& scenarios, const ScoreFn& fn);

struct CheckResult {
  std::string name;
  bool evaluated = false;  // false when the suite held no scenarios for the check
  bool pass = false;
  std::string detail;
  Json stats;
};

struct ConstraintReport {
  std::vector<CheckResult> checks;

  /// True when at least one check ran and none failed.
  bool all_pass() const;
  Json to_json() const;
};

CheckResult check_invariance(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t);
CheckResult check_entity_sensitivity(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t);
CheckResult check_relation_sensitivity(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t);
CheckResult check_range(const std::vector<ScoredScenario>& s);
CheckResult check_three_level_ordering(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t);

ConstraintReport check_constraints(const std::vector<ScoredScenario>& scored,
                                   const ConstraintThresholds& t = {});

/// Mean T3S drop from the unshifted variant, averaged over every shift count.
struct Sensitivity {
  double entity = 0.0;    // entity-shift scenarios of the ablation group
  double relation = 0.0;  // relation-shift scenarios of the ablation group
};
Sensitivity ablation_sensitivity(const std::vector<ScoredScenario>& scored);

/// Entity-blind stub used to self-test the harness: every pair scores 1.
ScoreReport ignore_entities_stub(const PairInput& pair);

}  // namespace t3s
