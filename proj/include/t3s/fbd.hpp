#pragma once

// Foreground-background decoupling: a projection, two attraction/repulsion
// interaction layers and a sigmoid gate that softly splits every entity of a
// set into a foreground and a background component.

#include "t3s/types.hpp"

#include <cstdint>
#include <vector>

namespace t3s {

inline constexpr int kFbdLayers = 2;

struct FbdWeights {
  Matrix W_e;              // latent_dim x in_dim
  Vector b_e;              // latent_dim
  std::vector<Matrix> P;   // kFbdLayers of latent_dim x latent_dim
  Vector G_w;              // latent_dim
  double G_b = 0.0;
  double alpha = 0.5;
  double beta = 0.1;

  Eigen::Index in_dim() const { return W_e.cols(); }
  Eigen::Index latent_dim() const { return W_e.rows(); }

  /// Throws ValidationError on inconsistent shapes, non-finite entries or negative strengths.
  void validate() const;

  /// Number of trainable scalars (alpha and beta are fixed hyperparameters).
  Eigen::Index parameter_count() const;
  /// Trainable parameters in the order W_e (col-major), b_e, P[0], P[1], G_w, G_b.
  Vector flatten() const;
  void unflatten(const Eigen::Ref<const Vector>& theta);
};

/// Embeds features into the first in_dim latent coordinates (zero padding),
/// identity interaction maps, neutral gate (p = 0.5).
FbdWeights lifting_weights(Eigen::Index in_dim, Eigen::Index latent_dim = 0,
                           double alpha = 0.5, double beta = 0.1);

/// Every trainable entry uniform in [-0.1, 0.1], drawn from `seed`.
FbdWeights random_weights(Eigen::Index in_dim, Eigen::Index latent_dim, std::uint64_t seed,
                          double alpha = 0.5, double beta = 0.1);

/// Rows of `features` are entity features. Returns rows z_i = W_e e_i + b_e.
Matrix project(const Eigen::Ref<const Matrix>& features, const FbdWeights& w);

/// One attraction/repulsion layer over the rows of Z.
Matrix interact_layer(const Eigen::Ref<const Matrix>& Z, int layer, const FbdWeights& w);

/// p_i = sigmoid(G_w . z_i + G_b) for every row.
Vector gate(const Eigen::Ref<const Matrix>& Z, const FbdWeights& w);

struct Decomposition {
  Matrix latent;  // z^(L), one row per entity
  Matrix fg;      // p_i z_i
  Matrix bg;      // (1 - p_i) z_i
  Vector p;
  Vector area;    // inherited from the entity set

  Eigen::Index size() const { return latent.rows(); }
};

/// Rows of the raw feature matrix of an entity set.
Matrix feature_matrix(const EntitySet& es);
Vector area_vector(const EntitySet& es);

Decomposition decouple(const EntitySet& es, const FbdWeights& w);

/// Copy of `es` with fg_prob filled from `p`.
EntitySet with_fg_prob(EntitySet es, const Vector& p);

// ---------------------------------------------------------------------------
// Standalone trainer (binary cross-entropy on per-entity fg labels).

struct LabeledSet {
  EntitySet set;
  std::vector<int> labels;  // aligned with set.entities, values in {0, 1}
};

struct FitOptions {
  double learning_rate = 0.5;
  int epochs = 200;
  Eigen::Index latent_dim = 0;  // 0 selects 2 * in_dim
  double alpha = 0.5;
  double beta = 0.1;
  int max_halvings = 40;
};

struct FitResult {
  FbdWeights weights;
  std::vector<double> loss_history;  // initial loss followed by one entry per epoch
  int rejected_steps = 0;
  double final_learning_rate = 0.0;
};

/// Mean BCE of the gate outputs over every labeled entity.
double bce_loss(const std::vector<LabeledSet>& data, const FbdWeights& w);

/// Mean BCE and its analytic gradient in FbdWeights::flatten() order.
double bce_loss_gradient(const std::vector<LabeledSet>& data, const FbdWeights& w,
                         Vector& gradient);

/// Full-batch gradient descent from random_weights(init_seed). A step that
/// raises the loss is rejected and the learning rate halved.
FitResult fit(const std::vector<LabeledSet>& data, const FitOptions& options,
              std::uint64_t init_seed);

}  // namespace t3s
