#pragma once

// Best-match entity-set scoring. An entity list is a row matrix of features;
// areas are only ever read from the first (reference) list.

#include "t3s/types.hpp"

#include <vector>

namespace t3s {

struct MatchPair {
  Eigen::Index i = 0;
  Eigen::Index j_star = 0;
  double s_star = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;          // one per row of the first list, in order
  std::vector<std::size_t> omega;        // indices into pairs with s_star > threshold

  /// Pairs whose j_star is shared with another valid pair.
  int many_to_one() const;
};

/// For every row of F1 the most similar row of F2 (cosine, lowest j on ties).
/// Throws std::invalid_argument on empty lists or a width mismatch.
MatchResult best_match(const Eigen::Ref<const Matrix>& F1, const Eigen::Ref<const Matrix>& F2,
                       double match_threshold = 0.0);

/// Temperature softmax of s_star over the members of omega, in omega order.
/// Throws std::invalid_argument when omega is empty or tau <= 0.
Vector confidence_weights(const MatchResult& result, double tau);

/// alpha_i * area_i normalized to sum to 1.
Vector area_weights(const Eigen::Ref<const Vector>& alpha, const Eigen::Ref<const Vector>& areas);

struct SetScore {
  double value = 0.0;
  int valid_matches = 0;
  int many_to_one = 0;
  bool degenerate = false;  // an empty list or empty omega forced the value to 0
};

/// Confidence- and area-weighted mean best-match cosine from F1 into F2.
SetScore set_score(const Eigen::Ref<const Matrix>& F1, const Eigen::Ref<const Vector>& area1,
                   const Eigen::Ref<const Matrix>& F2, double tau, double match_threshold = 0.0);

struct FusionWeights {
  double w_fg = 1.0;
  double w_bg = 0.0;
  double v_fg = 0.0;
  double v_bg = 0.0;
};

FusionWeights variance_fusion(const Eigen::Ref<const Matrix>& fg1,
                              const Eigen::Ref<const Matrix>& fg2,
                              const Eigen::Ref<const Matrix>& bg1,
                              const Eigen::Ref<const Matrix>& bg2, double lambda_bg);

inline double entity_score(double eps_f, double eps_b, const FusionWeights& fw) {
  return fw.w_fg * eps_f + fw.w_bg * eps_b;
}

}  // namespace t3s
