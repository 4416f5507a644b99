#include "t3s/scorer.hpp"

#include "t3s/linalg.hpp"
#include "t3s/matching.hpp"
#include "t3s/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace t3s {

double harmonic_couple(double a, double b, double clamp_eps) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("harmonic_couple: non-finite term");
  a = std::clamp(a, clamp_eps, 1.0);
  b = std::clamp(b, clamp_eps, 1.0);
  return 2.0 * a * b / (a + b);
}

namespace {

bool outside_unit(double x, double eps) { return x < eps || x > 1.0; }

ScoreReport score_directed(const PairSide& ref, const PairSide& dist, const FbdWeights& w,
                           const EmbeddingTable* table, const MetricConfig& cfg) {
  ScoreReport r;

  if (cfg.disable_fbd) {
    const SetScore s = set_score(feature_matrix(ref.entities), area_vector(ref.entities),
                                 feature_matrix(dist.entities), cfg.tau, cfg.match_threshold);
    r.eps_f = s.value;
    r.eps_b = s.value;
    r.w_fg = 1.0;
    r.w_bg = 0.0;
    r.matched_fg = s.valid_matches;
    r.many_to_one_fg = s.many_to_one;
    r.no_valid_fg_match = s.degenerate;
    r.mean_p_ref = 1.0;
    r.mean_p_dist = 1.0;
  } else {
    const Decomposition d1 = decouple(ref.entities, w);
    const Decomposition d2 = decouple(dist.entities, w);
    const SetScore sf = set_score(d1.fg, d1.area, d2.fg, cfg.tau, cfg.match_threshold);
    const SetScore sb = set_score(d1.bg, d1.area, d2.bg, cfg.tau, cfg.match_threshold);
    const FusionWeights fw = variance_fusion(d1.fg, d2.fg, d1.bg, d2.bg, cfg.lambda_bg);
    r.eps_f = sf.value;
    r.eps_b = sb.value;
    r.w_fg = fw.w_fg;
    r.w_bg = fw.w_bg;
    r.matched_fg = sf.valid_matches;
    r.matched_bg = sb.valid_matches;
    r.many_to_one_fg = sf.many_to_one;
    r.many_to_one_bg = sb.many_to_one;
    r.no_valid_fg_match = sf.degenerate;
    r.no_valid_bg_match = sb.degenerate;
    r.mean_p_ref = d1.p.size() ? d1.p.mean() : 0.0;
    r.mean_p_dist = d2.p.size() ? d2.p.mean() : 0.0;
  }
  r.eps_ent = entity_score(r.eps_f, r.eps_b, FusionWeights{r.w_fg, r.w_bg, 0.0, 0.0});

  if (table) {
    const LabelEmbeddings e1 = embed_annotation(ref.annotation, *table);
    const LabelEmbeddings e2 = embed_annotation(dist.annotation, *table);
    r.oov_labels = e1.oov_count + e2.oov_count;
    r.alpha_cls = avg_max_similarity(e1.cls, e2.cls);
    r.eps_r = avg_max_similarity(e1.rel, e2.rel);
  } else {
    r.alpha_cls = 1.0;
    r.class_term_skipped = true;
  }

  const double raw_prior = cosine(ref.entities.global_feature, dist.entities.global_feature);
  r.alpha_rel = global_relation_prior(ref.entities.global_feature, dist.entities.global_feature);
  r.alpha_rel_clamped = raw_prior < 0.0;

  r.eps_ent_tilde = r.eps_ent * r.alpha_cls;
  r.eps_r_tilde = cfg.disable_relation ? r.eps_ent_tilde : r.alpha_rel * r.eps_r;
  r.ent_clamped = outside_unit(r.eps_ent_tilde, cfg.clamp_eps);
  r.rel_clamped = outside_unit(r.eps_r_tilde, cfg.clamp_eps);
  r.t3s = harmonic_couple(r.eps_ent_tilde, r.eps_r_tilde, cfg.clamp_eps);
  return r;
}

ScoreReport average(const ScoreReport& a, const ScoreReport& b) {
  ScoreReport r = a;
  auto mid = [](double x, double y) { return 0.5 * (x + y); };
  r.eps_f = mid(a.eps_f, b.eps_f);
  r.eps_b = mid(a.eps_b, b.eps_b);
  r.w_fg = mid(a.w_fg, b.w_fg);
  r.w_bg = mid(a.w_bg, b.w_bg);
  r.eps_ent = mid(a.eps_ent, b.eps_ent);
  r.alpha_cls = mid(a.alpha_cls, b.alpha_cls);
  r.eps_r = mid(a.eps_r, b.eps_r);
  r.alpha_rel = mid(a.alpha_rel, b.alpha_rel);
  r.eps_ent_tilde = mid(a.eps_ent_tilde, b.eps_ent_tilde);
  r.eps_r_tilde = mid(a.eps_r_tilde, b.eps_r_tilde);
  r.t3s = mid(a.t3s, b.t3s);
  r.ent_clamped = a.ent_clamped || b.ent_clamped;
  r.rel_clamped = a.rel_clamped || b.rel_clamped;
  r.alpha_rel_clamped = a.alpha_rel_clamped || b.alpha_rel_clamped;
  r.no_valid_fg_match = a.no_valid_fg_match || b.no_valid_fg_match;
  r.no_valid_bg_match = a.no_valid_bg_match || b.no_valid_bg_match;
  return r;
}

}  // namespace

ScoreReport score_pair(const PairInput& pair, const FbdWeights& weights, const EmbeddingTable* table,
                       const MetricConfig& cfg) {
  cfg.validate();
  const EntitySet& a = pair.ref.entities;
  const EntitySet& b = pair.dist.entities;
  if (a.feature_dim != b.feature_dim) {
    throw std::invalid_argument("score_pair: feature_dim " + std::to_string(a.feature_dim) + " vs " +
                                std::to_string(b.feature_dim));
  }
  if (!table && !cfg.disable_relation) {
    throw std::invalid_argument("score_pair: an embedding table is required when the relation term is enabled");
  }

  FbdWeights w = weights;
  if (cfg.alpha_fbd) w.alpha = *cfg.alpha_fbd;
  if (cfg.beta_fbd) w.beta = *cfg.beta_fbd;
  if (!cfg.disable_fbd && w.in_dim() != a.feature_dim) {
    throw std::invalid_argument("score_pair: FBD in_dim " + std::to_string(w.in_dim()) + " differs from feature_dim " +
                                std::to_string(a.feature_dim));
  }

  ScoreReport fwd = score_directed(pair.ref, pair.dist, w, table, cfg);
  if (!cfg.symmetric_mode) return fwd;
  return average(fwd, score_directed(pair.dist, pair.ref, w, table, cfg));
}

}  // namespace t3s
