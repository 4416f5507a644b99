#pragma once

#include "t3s/fbd.hpp"
#include "t3s/io.hpp"
#include "t3s/linalg.hpp"
#include "t3s/matching.hpp"
#include "t3s/scorer.hpp"
#include "t3s/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace t3s::test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(T3S_FIXTURE_DIR) / rel; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("t3s_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline EntitySet random_entity_set(std::mt19937_64& rng, int n, Eigen::Index d, const std::string& id = "rand") {
  std::uniform_real_distribution<double> area(1.0, 1000.0);
  EntitySet es;
  es.image_id = id;
  es.feature_dim = d;
  const Matrix F = random_matrix(n, d, rng);
  for (int i = 0; i < n; ++i) {
    Entity e;
    e.id = "e" + std::to_string(i);
    e.feature = F.row(i).transpose();
    e.area = area(rng);
    es.entities.push_back(std::move(e));
  }
  es.global_feature = random_matrix(1, d, rng).row(0).transpose();
  return es;
}

/// Three-word-block fixture table: unit basis vectors for each word.
inline EmbeddingTable basis_table(const std::vector<std::string>& words) {
  const auto d = static_cast<Eigen::Index>(words.size());
  EmbeddingTable t(d);
  for (Eigen::Index k = 0; k < d; ++k) t.insert(words[static_cast<std::size_t>(k)], Vector::Unit(d, k));
  return t;
}

/// Scene pair where dist is an exact copy of ref.
inline PairInput self_pair(const Scene& s) { return PairInput{{s.entities, s.annotation}, {s.entities, s.annotation}}; }

}  // namespace t3s::test
