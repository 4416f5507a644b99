#pragma once

// Class- and relation-level consistency over word embeddings of the labels.

#include "t3s/types.hpp"

namespace t3s {

struct LabelEmbeddings {
  Matrix cls;  // one row per class label, word_dim wide
  Matrix rel;  // one row per triplet, [subject; predicate; object], 3 * word_dim wide
  int oov_count = 0;
};

LabelEmbeddings embed_annotation(const SemanticAnnotation& ann, const EmbeddingTable& table);

/// Mean over max(|V1|, |V2|) padded rows of V1 of the best cosine against V2.
/// Padded and zero rows contribute 0. Both empty gives 1, exactly one empty gives 0.
/// Throws std::invalid_argument when both are non-empty with different widths.
double avg_max_similarity(const Eigen::Ref<const Matrix>& V1, const Eigen::Ref<const Matrix>& V2);

double class_consistency(const SemanticAnnotation& a1, const SemanticAnnotation& a2,
                         const EmbeddingTable& table);
double relation_consistency(const SemanticAnnotation& a1, const SemanticAnnotation& a2,
                            const EmbeddingTable& table);

/// Cosine of the global features clamped to [0, 1]. Throws std::invalid_argument on a zero vector.
double global_relation_prior(const Eigen::Ref<const Vector>& g1, const Eigen::Ref<const Vector>& g2);

}  // namespace t3s
