#include "support.hpp"

#include "t3s/semantics.hpp"

#include <doctest.h>

using namespace t3s;

TEST_SUITE("semantics") {

TEST_CASE("annotation embedding") {
  const EmbeddingTable t = t3s::test::basis_table({"cat", "near", "dog"});
  SemanticAnnotation ann{"a", {"cat"}, {{"cat", "near", "dog"}}};
  const LabelEmbeddings e = embed_annotation(ann, t);
  CHECK(e.cls.rows() == 1);
  CHECK(e.cls.row(0).transpose() == Vector::Unit(3, 0));
  REQUIRE(e.rel.cols() == 9);
  Vector expect = Vector::Zero(9);
  expect[0] = 1;  // cat in block 0
  expect[4] = 1;  // near in block 1
  expect[8] = 1;  // dog in block 2
  CHECK(e.rel.row(0).transpose() == expect);
  CHECK(e.oov_count == 0);

  const LabelEmbeddings empty = embed_annotation(SemanticAnnotation{"b", {}, {}}, t);
  CHECK(empty.cls.rows() == 0);
  CHECK(empty.rel.rows() == 0);

  CHECK(embed_annotation(SemanticAnnotation{"c", {"unicorn"}, {}}, t).oov_count == 1);
}

TEST_CASE("avg-max examples") {
  const Matrix I = Matrix::Identity(2, 2);
  CHECK(avg_max_similarity(I, I) == 1.0);

  Matrix a(1, 2), b(1, 2);
  a << 1, 0;
  b << 0, 1;
  CHECK(avg_max_similarity(a, b) == 0.0);
  CHECK(avg_max_similarity(a, I) == doctest::Approx(0.5));
  CHECK(avg_max_similarity(I, a) == doctest::Approx(0.5));

  CHECK(avg_max_similarity(Matrix(0, 2), Matrix(0, 2)) == 1.0);
  CHECK(avg_max_similarity(Matrix(0, 2), a) == 0.0);
  CHECK(avg_max_similarity(a, Matrix(0, 2)) == 0.0);
  CHECK_THROWS_AS(avg_max_similarity(a, Matrix::Ones(1, 3)), std::invalid_argument);
}

TEST_CASE("avg-max properties") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n1 = 1 + static_cast<Eigen::Index>(rng() % 6), n2 = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Matrix V1 = t3s::test::random_matrix(n1, 4, rng);
    const Matrix V2 = t3s::test::random_matrix(n2, 4, rng);
    CHECK(avg_max_similarity(V1, V1) == doctest::Approx(1.0).epsilon(1e-14));

    const double base = avg_max_similarity(V1, V2);
    Eigen::PermutationMatrix<Eigen::Dynamic> p1(n1), p2(n2);
    p1.setIdentity();
    p2.setIdentity();
    std::shuffle(p1.indices().data(), p1.indices().data() + n1, rng);
    std::shuffle(p2.indices().data(), p2.indices().data() + n2, rng);
    CHECK(avg_max_similarity(p1 * V1, p2 * V2) == doctest::Approx(base).epsilon(1e-14));

    // a zeroed row scores 0, so it gives up exactly its own row maximum
    const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n1));
    double row_best = cosine_matrix(V1, V2).row(i).maxCoeff();
    if (n2 < n1) row_best = std::max(row_best, 0.0);
    Matrix dropped = V1;
    dropped.row(i).setZero();
    CHECK(avg_max_similarity(dropped, V2) ==
          doctest::Approx(base - row_best / static_cast<double>(std::max(n1, n2))).epsilon(1e-12));
  }
}

TEST_CASE("class and relation consistency") {
  const SynthVocab& v = synth_vocab();
  SemanticAnnotation horse{"a", {"horse"}, {}}, zebra{"b", {"zebra"}, {}};
  CHECK(class_consistency(horse, horse, v.table) == doctest::Approx(1.0));
  CHECK(class_consistency(horse, zebra, v.table) == doctest::Approx(0.8));
  CHECK(class_consistency(SemanticAnnotation{}, SemanticAnnotation{}, v.table) == 1.0);

  SemanticAnnotation r1{"a", {"person", "horse"}, {{"person", "riding", "horse"}}};
  SemanticAnnotation r2 = r1;
  CHECK(relation_consistency(r1, r2, v.table) == doctest::Approx(1.0));
  r2.relations[0].predicate = "under";
  CHECK(relation_consistency(r1, r2, v.table) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  r2.relations.clear();
  CHECK(relation_consistency(r1, r2, v.table) == 0.0);
}

TEST_CASE("global relation prior") {
  const Vector g1 = Vector::Unit(2, 0);
  CHECK(global_relation_prior(g1, g1) == 1.0);
  CHECK(global_relation_prior(g1, Vector::Unit(2, 1)) == 0.0);
  CHECK(global_relation_prior(g1, Vector::Ones(2)) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(global_relation_prior(g1, -g1) == 0.0);
  CHECK_THROWS_AS(global_relation_prior(g1, Vector::Zero(2)), std::invalid_argument);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const Matrix m = t3s::test::random_matrix(2, 5, rng);
    const double a = global_relation_prior(m.row(0).transpose(), m.row(1).transpose());
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

}  // TEST_SUITE
