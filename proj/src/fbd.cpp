#include "t3s/fbd.hpp"

#include "t3s/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace t3s {

namespace {

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw ValidationError(std::string("fbd weights: ") + name + " has a non-finite entry");
}

// Per-layer intermediates kept for the backward pass.
struct LayerCache {
  Matrix Z;     // layer input
  Matrix W;     // attraction softmax
  Matrix dist;  // pairwise Euclidean distances
  Matrix E;     // exp(-dist)
  Matrix U;     // z + alpha h - beta r, before P
};

Matrix layer_forward(const Eigen::Ref<const Matrix>& Z, const Matrix& P, double alpha, double beta,
                     LayerCache* cache) {
  const Eigen::Index n = Z.rows();
  Matrix D2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (Z.row(i) - Z.row(j)).squaredNorm();
      D2(i, j) = d2;
      D2(j, i) = d2;
    }
  }
  // softmax_j(-d_ij^2); the row maximum is the self term, exp(0) = 1
  Matrix W = (-D2).array().exp().matrix();
  const Vector row_sum = W.rowwise().sum();
  W = row_sum.cwiseInverse().asDiagonal() * W;

  const Matrix dist = D2.cwiseSqrt();
  const Matrix E = (-dist).array().exp().matrix();

  const Matrix H = W * Z;
  const Matrix R = E.rowwise().sum().asDiagonal() * Z - E * Z;
  Matrix U = Z + alpha * H - beta * R;
  Matrix out = U * P.transpose();

  if (cache) {
    cache->Z = Z;
    cache->W = std::move(W);
    cache->dist = dist;
    cache->E = E;
    cache->U = std::move(U);
  }
  return out;
}

// Accumulates parameter gradients of one layer and returns dL/dZ_in.
Matrix layer_backward(const LayerCache& c, const Matrix& P, double alpha, double beta, const Matrix& dOut,
                      Matrix& dP) {
  const Eigen::Index n = c.Z.rows();
  const Matrix& Z = c.Z;

  const Matrix dU = dOut * P;
  dP += dOut.transpose() * c.U;

  Matrix dZ = dU;
  const Matrix dH = alpha * dU;
  const Matrix dR = -beta * dU;

  // H = W Z
  const Matrix dW = dH * Z.transpose();
  dZ += c.W.transpose() * dH;

  // W = row softmax of S = -D2
  const Vector wdw = (c.W.cwiseProduct(dW)).rowwise().sum();
  const Matrix dS = c.W.cwiseProduct(dW - wdw.replicate(1, n));
  Matrix dD2 = -dS;

  // R_i = sum_j E_ij (z_i - z_j)
  dZ += c.E.rowwise().sum().asDiagonal() * dR - c.E.transpose() * dR;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = c.dist(i, j);
      if (i == j || d == 0.0) continue;  // (z_i - z_j) vanishes, so does the chain
      const double dE = dR.row(i).dot(Z.row(i) - Z.row(j));
      const double dd = -c.E(i, j) * dE;
      dD2(i, j) += dd / (2.0 * d);
    }
  }

  // D2_ij = |z_i - z_j|^2
  const Matrix G = dD2 + dD2.transpose();
  dZ += 2.0 * (G.rowwise().sum().asDiagonal() * Z - G * Z);
  return dZ;
}

struct ForwardPass {
  Matrix Z0;
  std::vector<LayerCache> layers;
  Matrix ZL;
  Vector logits;
};

ForwardPass forward(const Eigen::Ref<const Matrix>& X, const FbdWeights& w, bool keep_cache) {
  ForwardPass f;
  f.Z0 = project(X, w);
  Matrix Z = f.Z0;
  f.layers.resize(w.P.size());
  for (std::size_t l = 0; l < w.P.size(); ++l) {
    Z = layer_forward(Z, w.P[l], w.alpha, w.beta, keep_cache ? &f.layers[l] : nullptr);
  }
  f.logits = (Z * w.G_w).array() + w.G_b;
  f.ZL = std::move(Z);
  return f;
}

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

void check_training_data(const std::vector<LabeledSet>& data, const FbdWeights& w) {
  if (data.empty()) throw std::invalid_argument("fbd fit: empty training data");
  for (std::size_t s = 0; s < data.size(); ++s) {
    const LabeledSet& ls = data[s];
    const std::string where = "fbd fit: set " + std::to_string(s);
    if (ls.set.entities.empty()) throw std::invalid_argument(where + " has no entities");
    if (ls.labels.size() != ls.set.entities.size()) throw std::invalid_argument(where + ": label count mismatch");
    for (int y : ls.labels) {
      if (y != 0 && y != 1) throw std::invalid_argument(where + ": labels must be 0 or 1");
    }
    if (ls.set.feature_dim != w.in_dim()) throw std::invalid_argument(where + ": feature_dim differs from in_dim");
  }
}

std::size_t entity_count(const std::vector<LabeledSet>& data) {
  std::size_t n = 0;
  for (const auto& ls : data) n += ls.labels.size();
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

void FbdWeights::validate() const {
  const Eigen::Index m = latent_dim();
  if (in_dim() <= 0 || m <= 0) throw ValidationError("fbd weights: in_dim and latent_dim must be positive");
  if (b_e.size() != m) throw ValidationError("fbd weights: b_e must have latent_dim entries");
  if (static_cast<int>(P.size()) != kFbdLayers) {
    throw ValidationError("fbd weights: expected " + std::to_string(kFbdLayers) + " interaction maps");
  }
  for (const Matrix& p : P) {
    if (p.rows() != m || p.cols() != m) throw ValidationError("fbd weights: P must be latent_dim x latent_dim");
    require_finite(p, "P");
  }
  if (G_w.size() != m) throw ValidationError("fbd weights: G_w must have latent_dim entries");
  require_finite(W_e, "W_e");
  require_finite(b_e, "b_e");
  require_finite(G_w, "G_w");
  if (!std::isfinite(G_b)) throw ValidationError("fbd weights: G_b is not finite");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("fbd weights: alpha must be non-negative");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("fbd weights: beta must be non-negative");
}

Eigen::Index FbdWeights::parameter_count() const {
  Eigen::Index n = W_e.size() + b_e.size() + G_w.size() + 1;
  for (const Matrix& p : P) n += p.size();
  return n;
}

Vector FbdWeights::flatten() const {
  Vector theta(parameter_count());
  Eigen::Index k = 0;
  auto put = [&](const auto& m) {
    theta.segment(k, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    k += m.size();
  };
  put(W_e);
  put(b_e);
  for (const Matrix& p : P) put(p);
  put(G_w);
  theta[k] = G_b;
  return theta;
}

void FbdWeights::unflatten(const Eigen::Ref<const Vector>& theta) {
  if (theta.size() != parameter_count()) throw std::invalid_argument("fbd weights: parameter vector size mismatch");
  Eigen::Index k = 0;
  auto get = [&](auto& m) {
    Eigen::Map<Vector>(m.data(), m.size()) = theta.segment(k, m.size());
    k += m.size();
  };
  get(W_e);
  get(b_e);
  for (Matrix& p : P) get(p);
  get(G_w);
  G_b = theta[k];
}

FbdWeights lifting_weights(Eigen::Index in_dim, Eigen::Index latent_dim, double alpha, double beta) {
  if (latent_dim == 0) latent_dim = 2 * in_dim;
  if (in_dim <= 0 || latent_dim < in_dim) throw std::invalid_argument("lifting weights need latent_dim >= in_dim > 0");
  FbdWeights w;
  w.W_e = Matrix::Zero(latent_dim, in_dim);
  w.W_e.topRows(in_dim).setIdentity();
  w.b_e = Vector::Zero(latent_dim);
  w.P.assign(kFbdLayers, Matrix::Identity(latent_dim, latent_dim));
  w.G_w = Vector::Zero(latent_dim);
  w.G_b = 0.0;
  w.alpha = alpha;
  w.beta = beta;
  return w;
}

FbdWeights random_weights(Eigen::Index in_dim, Eigen::Index latent_dim, std::uint64_t seed, double alpha,
                          double beta) {
  if (latent_dim == 0) latent_dim = 2 * in_dim;
  if (in_dim <= 0 || latent_dim <= 0) throw std::invalid_argument("random weights need positive dimensions");
  FbdWeights w;
  w.W_e.resize(latent_dim, in_dim);
  w.b_e.resize(latent_dim);
  w.P.assign(kFbdLayers, Matrix(latent_dim, latent_dim));
  w.G_w.resize(latent_dim);
  w.alpha = alpha;
  w.beta = beta;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  Vector theta(w.parameter_count());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = u(rng);
  w.unflatten(theta);
  return w;
}

Matrix project(const Eigen::Ref<const Matrix>& features, const FbdWeights& w) {
  if (features.cols() != w.in_dim()) {
    throw std::invalid_argument("fbd project: feature width " + std::to_string(features.cols()) +
                                " differs from in_dim " + std::to_string(w.in_dim()));
  }
  return (features * w.W_e.transpose()).rowwise() + w.b_e.transpose();
}

Matrix interact_layer(const Eigen::Ref<const Matrix>& Z, int layer, const FbdWeights& w) {
  if (Z.rows() == 0) throw std::invalid_argument("fbd interact_layer: empty input");
  if (layer < 0 || layer >= static_cast<int>(w.P.size())) {
    throw std::invalid_argument("fbd interact_layer: layer index out of range");
  }
  if (Z.cols() != w.latent_dim()) throw std::invalid_argument("fbd interact_layer: width differs from latent_dim");
  return layer_forward(Z, w.P[static_cast<std::size_t>(layer)], w.alpha, w.beta, nullptr);
}

Vector gate(const Eigen::Ref<const Matrix>& Z, const FbdWeights& w) {
  if (Z.cols() != w.latent_dim()) throw std::invalid_argument("fbd gate: width differs from latent_dim");
  const Vector logits = (Z * w.G_w).array() + w.G_b;
  return logits.unaryExpr([](double a) { return sigmoid(a); });
}

Matrix feature_matrix(const EntitySet& es) {
  Matrix F(static_cast<Eigen::Index>(es.entities.size()), es.feature_dim);
  for (std::size_t i = 0; i < es.entities.size(); ++i) {
    const Vector& f = es.entities[i].feature;
    if (f.size() != es.feature_dim) throw std::invalid_argument("entity feature width differs from feature_dim");
    F.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return F;
}

Vector area_vector(const EntitySet& es) {
  Vector a(static_cast<Eigen::Index>(es.entities.size()));
  for (std::size_t i = 0; i < es.entities.size(); ++i) a[static_cast<Eigen::Index>(i)] = es.entities[i].area;
  return a;
}

Decomposition decouple(const EntitySet& es, const FbdWeights& w) {
  if (es.feature_dim != w.in_dim()) {
    throw std::invalid_argument("fbd decouple: feature_dim " + std::to_string(es.feature_dim) +
                                " differs from in_dim " + std::to_string(w.in_dim()));
  }
  Decomposition d;
  d.area = area_vector(es);
  Matrix Z = project(feature_matrix(es), w);
  if (Z.rows() > 0) {
    for (int l = 0; l < static_cast<int>(w.P.size()); ++l) Z = interact_layer(Z, l, w);
  }
  d.p = gate(Z, w);
  d.fg = d.p.asDiagonal() * Z;
  d.bg = (1.0 - d.p.array()).matrix().asDiagonal() * Z;
  d.latent = std::move(Z);
  return d;
}

EntitySet with_fg_prob(EntitySet es, const Vector& p) {
  if (p.size() != static_cast<Eigen::Index>(es.entities.size())) {
    throw std::invalid_argument("with_fg_prob: size mismatch");
  }
  for (std::size_t i = 0; i < es.entities.size(); ++i) es.entities[i].fg_prob = p[static_cast<Eigen::Index>(i)];
  return es;
}

// ---------------------------------------------------------------------------

double bce_loss(const std::vector<LabeledSet>& data, const FbdWeights& w) {
  check_training_data(data, w);
  double total = 0.0;
  for (const LabeledSet& ls : data) {
    const ForwardPass f = forward(feature_matrix(ls.set), w, false);
    for (Eigen::Index i = 0; i < f.logits.size(); ++i) {
      total += softplus(f.logits[i]) - ls.labels[static_cast<std::size_t>(i)] * f.logits[i];
    }
  }
  return total / static_cast<double>(entity_count(data));
}

double bce_loss_gradient(const std::vector<LabeledSet>& data, const FbdWeights& w, Vector& gradient) {
  check_training_data(data, w);
  const double inv_n = 1.0 / static_cast<double>(entity_count(data));

  Matrix dWe = Matrix::Zero(w.W_e.rows(), w.W_e.cols());
  Vector dbe = Vector::Zero(w.b_e.size());
  std::vector<Matrix> dP(w.P.size(), Matrix::Zero(w.latent_dim(), w.latent_dim()));
  Vector dGw = Vector::Zero(w.G_w.size());
  double dGb = 0.0;
  double total = 0.0;

  for (const LabeledSet& ls : data) {
    const Matrix X = feature_matrix(ls.set);
    const ForwardPass f = forward(X, w, true);
    Vector dA(f.logits.size());
    for (Eigen::Index i = 0; i < f.logits.size(); ++i) {
      const double y = ls.labels[static_cast<std::size_t>(i)];
      total += softplus(f.logits[i]) - y * f.logits[i];
      dA[i] = (sigmoid(f.logits[i]) - y) * inv_n;
    }
    dGw += f.ZL.transpose() * dA;
    dGb += dA.sum();
    Matrix dZ = dA * w.G_w.transpose();
    for (std::size_t l = w.P.size(); l-- > 0;) {
      dZ = layer_backward(f.layers[l], w.P[l], w.alpha, w.beta, dZ, dP[l]);
    }
    dWe += dZ.transpose() * X;
    dbe += dZ.colwise().sum().transpose();
  }

  FbdWeights g = w;
  g.W_e = dWe;
  g.b_e = dbe;
  g.P = dP;
  g.G_w = dGw;
  g.G_b = dGb;
  gradient = g.flatten();
  return total * inv_n;
}

FitResult fit(const std::vector<LabeledSet>& data, const FitOptions& options, std::uint64_t init_seed) {
  if (data.empty()) throw std::invalid_argument("fbd fit: empty training data");
  if (options.epochs < 0) throw std::invalid_argument("fbd fit: epochs must be non-negative");
  if (!(options.learning_rate > 0.0)) throw std::invalid_argument("fbd fit: learning rate must be positive");

  const Eigen::Index in_dim = data.front().set.feature_dim;
  FitResult result;
  result.weights = random_weights(in_dim, options.latent_dim, init_seed, options.alpha, options.beta);
  check_training_data(data, result.weights);

  Vector theta = result.weights.flatten();
  Vector grad;
  double loss = bce_loss_gradient(data, result.weights, grad);
  if (!std::isfinite(loss)) throw std::runtime_error("fbd fit: non-finite initial loss");
  result.loss_history.push_back(loss);

  double lr = options.learning_rate;
  FbdWeights trial = result.weights;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      trial.unflatten(theta - lr * grad);
      const double cand = bce_loss(data, trial);
      if (std::isfinite(cand) && cand <= loss) {
        theta = trial.flatten();
        result.weights = trial;
        loss = bce_loss_gradient(data, result.weights, grad);
        accepted = true;
        break;
      }
      lr *= 0.5;
      ++result.rejected_steps;
    }
    if (!accepted) {
      // no descent direction left at representable step sizes
      if (!std::isfinite(loss)) throw std::runtime_error("fbd fit: non-finite loss");
      result.loss_history.push_back(loss);
      break;
    }
    result.loss_history.push_back(loss);
  }
  result.final_learning_rate = lr;
  return result;
}

}  // namespace t3s
