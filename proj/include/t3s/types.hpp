#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace t3s {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed input document (syntax, missing field, wrong type).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed document whose content violates a data-model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entity {
  std::string id;
  Vector feature;
  double area = 0.0;
  std::optional<double> fg_prob;
};

/// One image as seen by the scorer: pooled region features plus a global feature.
struct EntitySet {
  std::string image_id;
  Eigen::Index feature_dim = 0;
  Vector global_feature;
  std::vector<Entity> entities;

  std::size_t size() const { return entities.size(); }
};

struct Relation {
  std::string subject;
  std::string predicate;
  std::string object;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct SemanticAnnotation {
  std::string image_id;
  std::vector<std::string> classes;
  std::vector<Relation> relations;
};

/// Static word-vector lookup (word2vec text export).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Eigen::Index word_dim) : word_dim_(word_dim) {}

  Eigen::Index word_dim() const { return word_dim_; }
  std::size_t size() const { return entries_.size(); }

  /// Inserts or replaces; returns true when the word was already present.
  bool insert(const std::string& word, Vector v);
  const Vector* find(const std::string& word) const;

  /// Words in insertion order of first appearance.
  const std::vector<std::string>& words() const { return order_; }

 private:
  Eigen::Index word_dim_ = 0;
  std::unordered_map<std::string, Vector> entries_;
  std::vector<std::string> order_;
};

/// Free parameters of the scorer.
struct MetricConfig {
  double tau = 0.1;
  double lambda_bg = 0.5;
  double clamp_eps = 1e-6;
  /// Overrides the attraction/repulsion strengths stored with the FBD weights.
  std::optional<double> alpha_fbd;
  std::optional<double> beta_fbd;
  double match_threshold = 0.0;
  bool symmetric_mode = false;
  bool disable_fbd = false;
  bool disable_relation = false;

  void validate() const;
};

struct ScoreReport {
  double eps_f = 0.0;
  double eps_b = 0.0;
  double w_fg = 1.0;
  double w_bg = 0.0;
  double eps_ent = 0.0;
  double alpha_cls = 0.0;
  double eps_r = 0.0;
  double alpha_rel = 0.0;
  double eps_ent_tilde = 0.0;
  double eps_r_tilde = 0.0;
  double t3s = 0.0;

  // matching diagnostics
  int matched_fg = 0;
  int matched_bg = 0;
  int many_to_one_fg = 0;
  int many_to_one_bg = 0;

  // FBD partition statistics (mean p over each side)
  double mean_p_ref = 0.0;
  double mean_p_dist = 0.0;

  int oov_labels = 0;

  bool ent_clamped = false;
  bool rel_clamped = false;
  bool alpha_rel_clamped = false;
  bool no_valid_fg_match = false;
  bool no_valid_bg_match = false;
  bool class_term_skipped = false;
};

}  // namespace t3s
