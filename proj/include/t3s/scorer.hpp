#pragma once

#include "t3s/fbd.hpp"
#include "t3s/types.hpp"

#include <functional>

namespace t3s {

struct PairSide {
  EntitySet entities;
  SemanticAnnotation annotation;
};

/// The reference image is always `ref`; the score is directional unless
/// MetricConfig::symmetric_mode is set.
struct PairInput {
  PairSide ref;
  PairSide dist;
};

/// Clamps both terms to [clamp_eps, 1] and returns their harmonic mean.
double harmonic_couple(double a, double b, double clamp_eps);

/// Full T3S pipeline. `table` may be null only when cfg.disable_relation is set,
/// in which case the class term is skipped (alpha_cls = 1).
/// Throws std::invalid_argument on inconsistent inputs.
ScoreReport score_pair(const PairInput& pair, const FbdWeights& w, const EmbeddingTable* table,
                       const MetricConfig& cfg);

using ScoreFn = std::function<ScoreReport(const PairInput&)>;

}  // namespace t3s
