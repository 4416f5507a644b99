#include "t3s/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace t3s {

std::vector<ScoredScenario> score_scenarios(const std::vector<Scenario>& scenarios, const ScoreFn& fn) {
  std::vector<ScoredScenario> out;
  out.reserve(scenarios.size());
  for (const Scenario& sc : scenarios) {
    ScoredScenario s{sc.group, sc.kind, sc.magnitude, sc.distance, sc.population, sc.seed, {}, {}};
    try {
      s.report = fn(sc.pair);
    } catch (const std::exception& e) {
      s.error = e.what();
      s.report.t3s = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool ConstraintReport::all_pass() const {
  bool any = false;
  for (const CheckResult& c : checks) {
    if (!c.evaluated) continue;
    any = true;
    if (!c.pass) return false;
  }
  return any;
}

Json ConstraintReport::to_json() const {
  Json list = Json::array();
  for (const CheckResult& c : checks) {
    list.push_back({{"name", c.name}, {"evaluated", c.evaluated}, {"pass", c.pass}, {"detail", c.detail},
                    {"stats", c.stats.is_null() ? Json::object() : c.stats}});
  }
  return {{"all_pass", all_pass()}, {"checks", std::move(list)}};
}

namespace {

std::vector<const ScoredScenario*> select(const std::vector<ScoredScenario>& s, const std::string& group,
                                          ScenarioKind kind) {
  std::vector<const ScoredScenario*> out;
  for (const ScoredScenario& x : s) {
    if (x.group == group && x.kind == kind) out.push_back(&x);
  }
  return out;
}

struct Curve {
  std::vector<int> k;
  std::vector<double> mean;
};

template <typename Get>
Curve mean_by_count(const std::vector<const ScoredScenario*>& rows, Get get) {
  std::map<int, std::pair<double, int>> acc;
  for (const ScoredScenario* r : rows) {
    auto& [sum, n] = acc[static_cast<int>(std::lround(r->magnitude))];
    sum += get(*r);
    ++n;
  }
  Curve c;
  for (const auto& [k, v] : acc) {
    c.k.push_back(k);
    c.mean.push_back(v.first / v.second);
  }
  return c;
}

/// Index of the first rising transition beyond tol, or -1.
int first_rise(const Curve& c, double tol) {
  for (std::size_t i = 1; i < c.mean.size(); ++i) {
    if (c.mean[i] > c.mean[i - 1] + tol) return static_cast<int>(i);
  }
  return -1;
}

Json curve_json(const Curve& c) {
  Json j = Json::array();
  for (std::size_t i = 0; i < c.k.size(); ++i) j.push_back({{"k", c.k[i]}, {"mean", c.mean[i]}});
  return j;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

bool finite_report(const ScoreReport& r) {
  for (double v : {r.eps_f, r.eps_b, r.w_fg, r.w_bg, r.eps_ent, r.alpha_cls, r.eps_r, r.alpha_rel, r.eps_ent_tilde,
                   r.eps_r_tilde, r.t3s, r.mean_p_ref, r.mean_p_dist}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

CheckResult check_invariance(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t) {
  CheckResult c{"c1_invariance", false, false, {}, {}};
  const auto rows = select(s, "c1", ScenarioKind::noise);
  if (rows.empty()) {
    c.detail = "no noise scenarios";
    return c;
  }
  c.evaluated = true;
  double lo = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const ScoredScenario* r : rows) {
    lo = std::min(lo, r->report.t3s);
    sum += r->report.t3s;
  }
  const double mean = sum / static_cast<double>(rows.size());
  c.pass = lo >= t.c1_min && mean >= t.c1_mean;
  c.stats = {{"n", rows.size()}, {"min", lo}, {"mean", mean}};
  c.detail = "min " + fmt(lo) + " (>= " + fmt(t.c1_min) + "), mean " + fmt(mean) + " (>= " + fmt(t.c1_mean) + ")";
  return c;
}

CheckResult check_entity_sensitivity(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t) {
  CheckResult c{"c2_entity_sensitivity", false, false, {}, {}};
  const auto rows = select(s, "c2", ScenarioKind::entity_shift);
  if (rows.empty()) {
    c.detail = "no entity-shift scenarios";
    return c;
  }
  c.evaluated = true;
  const Curve curve = mean_by_count(rows, [](const ScoredScenario& r) { return r.report.t3s; });
  const int rise = first_rise(curve, t.monotone_tol);

  // full unrelated shift against the unshifted score of the same seed
  std::map<std::uint64_t, double> base;
  for (const ScoredScenario* r : rows) {
    if (r->magnitude == 0.0) base[r->seed] = r->report.t3s;
  }
  int full = 0;
  int full_fail = 0;
  double worst_ratio = 0.0;
  for (const ScoredScenario* r : rows) {
    if (r->distance != ShiftDistance::unrelated || r->population == 0 ||
        static_cast<int>(std::lround(r->magnitude)) != r->population) {
      continue;
    }
    const auto it = base.find(r->seed);
    if (it == base.end()) continue;
    ++full;
    const double ratio = it->second > 0.0 ? r->report.t3s / it->second : std::numeric_limits<double>::infinity();
    worst_ratio = std::max(worst_ratio, ratio);
    if (!(r->report.t3s <= t.c2_ratio * it->second)) ++full_fail;
  }

  c.pass = rise < 0 && full > 0 && full_fail == 0;
  c.stats = {{"n", rows.size()},           {"mean_by_k", curve_json(curve)}, {"full_shift_pairs", full},
             {"full_shift_fail", full_fail}, {"worst_ratio", worst_ratio}};
  std::string d = rise < 0 ? "mean T3S non-increasing in k"
                           : "mean T3S rises from k=" + std::to_string(curve.k[rise - 1]) + " to k=" +
                                 std::to_string(curve.k[rise]);
  d += "; full unrelated shift ratio worst " + fmt(worst_ratio) + " (<= " + fmt(t.c2_ratio) + ")";
  if (full == 0) d += "; no full-shift scenarios";
  c.detail = d;
  return c;
}

CheckResult check_relation_sensitivity(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t) {
  CheckResult c{"c3_relation_sensitivity", false, false, {}, {}};
  const auto rows = select(s, "c3", ScenarioKind::relation_shift);
  if (rows.empty()) {
    c.detail = "no relation-shift scenarios";
    return c;
  }
  c.evaluated = true;
  const Curve er = mean_by_count(rows, [](const ScoredScenario& r) { return r.report.eps_r; });
  const Curve ts = mean_by_count(rows, [](const ScoredScenario& r) { return r.report.t3s; });
  const int rise_r = first_rise(er, t.monotone_tol);
  const int rise_t = first_rise(ts, t.monotone_tol);

  int full = 0;
  double worst = 0.0;
  for (const ScoredScenario* r : rows) {
    if (r->population > 0 && static_cast<int>(std::lround(r->magnitude)) == r->population) {
      ++full;
      worst = std::max(worst, r->report.eps_r);
    }
  }
  const bool bound_ok = full == 0 || worst <= t.c3_full_shift_bound + 1e-12;
  c.pass = rise_r < 0 && rise_t < 0 && bound_ok;
  c.stats = {{"n", rows.size()},
             {"eps_r_by_k", curve_json(er)},
             {"t3s_by_k", curve_json(ts)},
             {"full_shift_pairs", full},
             {"full_shift_max_eps_r", worst}};
  std::string d = rise_r < 0 ? "mean eps_r non-increasing" : "mean eps_r rises at k=" + std::to_string(er.k[rise_r]);
  d += rise_t < 0 ? "; mean T3S non-increasing" : "; mean T3S rises at k=" + std::to_string(ts.k[rise_t]);
  if (full > 0) d += "; full-shift eps_r max " + fmt(worst) + " (<= " + fmt(t.c3_full_shift_bound) + ")";
  c.detail = d;
  return c;
}

CheckResult check_range(const std::vector<ScoredScenario>& s) {
  CheckResult c{"c4_range", false, false, {}, {}};
  if (s.empty()) {
    c.detail = "no scenarios";
    return c;
  }
  c.evaluated = true;
  int out_of_range = 0;
  int non_finite = 0;
  int errors = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::string first_error;
  for (const ScoredScenario& r : s) {
    if (!r.error.empty()) {
      ++errors;
      if (first_error.empty()) first_error = r.error;
      continue;
    }
    if (!finite_report(r.report)) {
      ++non_finite;
      continue;
    }
    lo = std::min(lo, r.report.t3s);
    hi = std::max(hi, r.report.t3s);
    if (r.report.t3s < 0.0 || r.report.t3s > 1.0) ++out_of_range;
  }
  c.pass = out_of_range == 0 && non_finite == 0 && errors == 0;
  c.stats = {{"n", s.size()}, {"min", lo}, {"max", hi}, {"out_of_range", out_of_range}, {"non_finite", non_finite},
             {"errors", errors}};
  c.detail = "T3S in [" + fmt(lo) + ", " + fmt(hi) + "], " + std::to_string(out_of_range) + " out of range, " +
             std::to_string(non_finite) + " non-finite, " + std::to_string(errors) + " errors";
  if (!first_error.empty()) c.detail += " (first: " + first_error + ")";
  return c;
}

CheckResult check_three_level_ordering(const std::vector<ScoredScenario>& s, const ConstraintThresholds& t) {
  CheckResult c{"three_level_ordering", false, false, {}, {}};
  struct Levels {
    double v[3];
    bool seen[3] = {false, false, false};
  };
  std::map<std::uint64_t, Levels> by_seed;
  for (const ScoredScenario& r : s) {
    if (r.group != "three-level") continue;
    int lvl = -1;
    if (r.kind == ScenarioKind::noise) lvl = 0;
    if (r.kind == ScenarioKind::entity_shift) lvl = r.distance == ShiftDistance::related ? 1 : 2;
    if (lvl < 0) continue;
    Levels& l = by_seed[r.seed];
    l.v[lvl] = r.report.t3s;
    l.seen[lvl] = true;
  }
  double sum[3] = {0, 0, 0};
  int complete = 0;
  int ordered = 0;
  for (const auto& [seed, l] : by_seed) {
    if (!(l.seen[0] && l.seen[1] && l.seen[2])) continue;
    ++complete;
    for (int i = 0; i < 3; ++i) sum[i] += l.v[i];
    if (l.v[0] > l.v[1] && l.v[1] > l.v[2]) ++ordered;
  }
  if (complete == 0) {
    c.detail = "no complete three-level seeds";
    return c;
  }
  c.evaluated = true;
  const double m[3] = {sum[0] / complete, sum[1] / complete, sum[2] / complete};
  const double frac = static_cast<double>(ordered) / complete;
  c.pass = frac >= t.ordering_fraction && m[0] > m[1] && m[1] > m[2];
  c.stats = {{"seeds", complete},
             {"ordered_fraction", frac},
             {"mean_noise", m[0]},
             {"mean_related", m[1]},
             {"mean_unrelated", m[2]}};
  c.detail = "ordered in " + std::to_string(ordered) + " of " + std::to_string(complete) + " seeds, fraction " +
             fmt(frac) + " (>= " + fmt(t.ordering_fraction) + "); means " + fmt(m[0]) +
             " > " + fmt(m[1]) + " > " + fmt(m[2]);
  return c;
}

ConstraintReport check_constraints(const std::vector<ScoredScenario>& scored, const ConstraintThresholds& t) {
  ConstraintReport r;
  r.checks.push_back(check_invariance(scored, t));
  r.checks.push_back(check_entity_sensitivity(scored, t));
  r.checks.push_back(check_relation_sensitivity(scored, t));
  r.checks.push_back(check_range(scored));
  r.checks.push_back(check_three_level_ordering(scored, t));
  return r;
}

Sensitivity ablation_sensitivity(const std::vector<ScoredScenario>& scored) {
  std::map<std::pair<int, std::uint64_t>, double> base;
  auto key = [](const ScoredScenario& r) { return std::make_pair(static_cast<int>(r.kind), r.seed); };
  for (const ScoredScenario& r : scored) {
    if (r.group == "ablation" && r.magnitude == 0.0) base[key(r)] = r.report.t3s;
  }
  double drop[2] = {0, 0};
  int n[2] = {0, 0};
  for (const ScoredScenario& r : scored) {
    if (r.group != "ablation" || r.magnitude == 0.0) continue;
    const auto it = base.find(key(r));
    if (it == base.end()) continue;
    const int slot = r.kind == ScenarioKind::entity_shift ? 0 : r.kind == ScenarioKind::relation_shift ? 1 : -1;
    if (slot < 0) continue;
    drop[slot] += it->second - r.report.t3s;
    ++n[slot];
  }
  return {n[0] ? drop[0] / n[0] : 0.0, n[1] ? drop[1] / n[1] : 0.0};
}

ScoreReport ignore_entities_stub(const PairInput&) {
  ScoreReport r;
  r.eps_f = r.eps_b = r.eps_ent = r.alpha_cls = r.eps_r = r.alpha_rel = 1.0;
  r.eps_ent_tilde = r.eps_r_tilde = r.t3s = 1.0;
  r.mean_p_ref = r.mean_p_dist = 1.0;
  return r;
}

}  // namespace t3s
