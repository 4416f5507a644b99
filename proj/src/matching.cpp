#include "t3s/matching.hpp"

#include "t3s/linalg.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace t3s {

int MatchResult::many_to_one() const {
  std::map<Eigen::Index, int> uses;
  for (std::size_t k : omega) ++uses[pairs[k].j_star];
  int n = 0;
  for (const auto& [j, count] : uses) {
    if (count > 1) n += count;
  }
  return n;
}

MatchResult best_match(const Eigen::Ref<const Matrix>& F1, const Eigen::Ref<const Matrix>& F2,
                       double match_threshold) {
  if (F1.rows() == 0 || F2.rows() == 0) throw std::invalid_argument("best_match: empty entity list");
  if (F1.cols() != F2.cols()) throw std::invalid_argument("best_match: feature widths differ");

  const Matrix S = cosine_matrix(F1, F2);
  MatchResult r;
  r.pairs.reserve(static_cast<std::size_t>(F1.rows()));
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    Eigen::Index j_star = 0;
    double best = S(i, 0);
    for (Eigen::Index j = 1; j < S.cols(); ++j) {
      if (S(i, j) > best) {
        best = S(i, j);
        j_star = j;
      }
    }
    if (best > match_threshold) r.omega.push_back(r.pairs.size());
    r.pairs.push_back({i, j_star, best});
  }
  return r;
}

Vector confidence_weights(const MatchResult& result, double tau) {
  if (result.omega.empty()) throw std::invalid_argument("confidence_weights: no valid correspondence");
  if (!(tau > 0.0)) throw std::invalid_argument("confidence_weights: tau must be positive");
  const auto n = static_cast<Eigen::Index>(result.omega.size());
  Vector logits(n);
  for (Eigen::Index k = 0; k < n; ++k) logits[k] = result.pairs[result.omega[static_cast<std::size_t>(k)]].s_star / tau;
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Vector area_weights(const Eigen::Ref<const Vector>& alpha, const Eigen::Ref<const Vector>& areas) {
  if (alpha.size() != areas.size()) throw std::invalid_argument("area_weights: size mismatch");
  if ((areas.array() <= 0.0).any()) throw std::invalid_argument("area_weights: areas must be positive");
  const Vector num = alpha.cwiseProduct(areas);
  const double total = num.sum();
  if (!(total > 0.0)) throw std::invalid_argument("area_weights: degenerate weights");
  return num / total;
}

SetScore set_score(const Eigen::Ref<const Matrix>& F1, const Eigen::Ref<const Vector>& area1,
                   const Eigen::Ref<const Matrix>& F2, double tau, double match_threshold) {
  SetScore out;
  if (F1.rows() == 0 || F2.rows() == 0) {
    out.degenerate = true;
    return out;
  }
  if (area1.size() != F1.rows()) throw std::invalid_argument("set_score: area count differs from entity count");

  const MatchResult m = best_match(F1, F2, match_threshold);
  out.valid_matches = static_cast<int>(m.omega.size());
  out.many_to_one = m.many_to_one();
  if (m.omega.empty()) {
    out.degenerate = true;
    return out;
  }

  const Vector alpha = confidence_weights(m, tau);
  Vector areas(alpha.size());
  Vector s(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    const MatchPair& p = m.pairs[m.omega[static_cast<std::size_t>(k)]];
    areas[k] = area1[p.i];
    s[k] = p.s_star;
  }
  out.value = area_weights(alpha, areas).dot(s);
  return out;
}

FusionWeights variance_fusion(const Eigen::Ref<const Matrix>& fg1, const Eigen::Ref<const Matrix>& fg2,
                              const Eigen::Ref<const Matrix>& bg1, const Eigen::Ref<const Matrix>& bg2,
                              double lambda_bg) {
  if (!(lambda_bg > 0.0)) throw std::invalid_argument("variance_fusion: lambda_bg must be positive");
  FusionWeights fw;
  fw.v_fg = mean_feature_variance(fg1) + mean_feature_variance(fg2);
  fw.v_bg = mean_feature_variance(bg1) + mean_feature_variance(bg2);

  const double denom = fw.v_fg + lambda_bg * fw.v_bg;
  if (!(denom > 0.0)) {
    fw.w_fg = 1.0;
    fw.w_bg = 0.0;
    return fw;
  }
  const double wf = fw.v_fg / denom;
  const double wb = lambda_bg * fw.v_bg / denom;
  const double total = wf + wb;
  fw.w_fg = wf / total;
  fw.w_bg = 1.0 - fw.w_fg;
  return fw;
}

}  // namespace t3s
