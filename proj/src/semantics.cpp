#include "t3s/semantics.hpp"

#include "t3s/embedding.hpp"
#include "t3s/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace t3s {

LabelEmbeddings embed_annotation(const SemanticAnnotation& ann, const EmbeddingTable& table) {
  const Eigen::Index dw = table.word_dim();
  LabelEmbeddings out;
  out.cls.resize(static_cast<Eigen::Index>(ann.classes.size()), dw);
  out.rel.resize(static_cast<Eigen::Index>(ann.relations.size()), 3 * dw);

  for (std::size_t i = 0; i < ann.classes.size(); ++i) {
    const PhraseEmbedding e = embed_phrase(ann.classes[i], table);
    out.oov_count += e.oov;
    out.cls.row(static_cast<Eigen::Index>(i)) = e.vector.transpose();
  }
  for (std::size_t i = 0; i < ann.relations.size(); ++i) {
    const Relation& r = ann.relations[i];
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::Index offset = 0;
    for (const std::string* part : {&r.subject, &r.predicate, &r.object}) {
      const PhraseEmbedding e = embed_phrase(*part, table);
      out.oov_count += e.oov;
      out.rel.block(row, offset, 1, dw) = e.vector.transpose();
      offset += dw;
    }
  }
  return out;
}

double avg_max_similarity(const Eigen::Ref<const Matrix>& V1, const Eigen::Ref<const Matrix>& V2) {
  const Eigen::Index n1 = V1.rows();
  const Eigen::Index n2 = V2.rows();
  if (n1 == 0 && n2 == 0) return 1.0;
  if (n1 == 0 || n2 == 0) return 0.0;
  if (V1.cols() != V2.cols()) throw std::invalid_argument("avg_max_similarity: embedding widths differ");

  // Padded rows of V1 score 0 against everything; padded columns of V2 add a
  // candidate of value 0 to every row max.
  const Eigen::Index N = std::max(n1, n2);
  const Matrix S = cosine_matrix(V1, V2);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n1; ++i) {
    double best = S.row(i).maxCoeff();
    if (n2 < N) best = std::max(best, 0.0);
    total += best;
  }
  return total / static_cast<double>(N);
}

double class_consistency(const SemanticAnnotation& a1, const SemanticAnnotation& a2, const EmbeddingTable& table) {
  return avg_max_similarity(embed_annotation(a1, table).cls, embed_annotation(a2, table).cls);
}

double relation_consistency(const SemanticAnnotation& a1, const SemanticAnnotation& a2,
                            const EmbeddingTable& table) {
  return avg_max_similarity(embed_annotation(a1, table).rel, embed_annotation(a2, table).rel);
}

double global_relation_prior(const Eigen::Ref<const Vector>& g1, const Eigen::Ref<const Vector>& g2) {
  if (g1.size() != g2.size()) throw std::invalid_argument("global_relation_prior: widths differ");
  if (g1.norm() == 0.0 || g2.norm() == 0.0) throw std::invalid_argument("global_relation_prior: zero global feature");
  return std::clamp(cosine(g1, g2), 0.0, 1.0);
}

}  // namespace t3s
