#include "support.hpp"

#include "t3s/matching.hpp"

#include <doctest.h>

using namespace t3s;

namespace {

Matrix rows2(std::initializer_list<std::pair<double, double>> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::Index i = 0;
  for (auto [a, b] : xs) m.row(i++) << a, b;
  return m;
}

/// Direct transcription of the three formulas with plain loops.
double naive_set_score(const Matrix& F1, const Vector& area, const Matrix& F2, double tau, double thr) {
  std::vector<double> s;
  std::vector<double> a;
  for (Eigen::Index i = 0; i < F1.rows(); ++i) {
    double best = -2.0;
    for (Eigen::Index j = 0; j < F2.rows(); ++j) {
      double dot = 0, n1 = 0, n2 = 0;
      for (Eigen::Index k = 0; k < F1.cols(); ++k) {
        dot += F1(i, k) * F2(j, k);
        n1 += F1(i, k) * F1(i, k);
        n2 += F2(j, k) * F2(j, k);
      }
      const double c = (n1 == 0 || n2 == 0) ? 0.0 : dot / (std::sqrt(n1) * std::sqrt(n2));
      if (c > best) best = c;
    }
    if (best > thr) {
      s.push_back(best);
      a.push_back(area[i]);
    }
  }
  if (s.empty()) return 0.0;
  double z = 0;
  for (double x : s) z += std::exp(x / tau);
  double num_total = 0;
  for (std::size_t k = 0; k < s.size(); ++k) num_total += std::exp(s[k] / tau) / z * a[k];
  double out = 0;
  for (std::size_t k = 0; k < s.size(); ++k) out += std::exp(s[k] / tau) / z * a[k] / num_total * s[k];
  return out;
}

}  // namespace

TEST_SUITE("matching") {

TEST_CASE("best match examples") {
  MatchResult r = best_match(rows2({{1, 0}}), rows2({{1, 0}, {0, 1}}));
  CHECK(r.pairs[0].j_star == 0);
  CHECK(r.pairs[0].s_star == 1.0);
  CHECK(r.omega.size() == 1);

  r = best_match(rows2({{1, 0}}), rows2({{0, 1}}));
  CHECK(r.pairs[0].s_star == 0.0);
  CHECK(r.omega.empty());

  r = best_match(rows2({{1, 1}}), rows2({{1, 0}, {0, 1}}));
  CHECK(r.pairs[0].j_star == 0);
  CHECK(r.pairs[0].s_star == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  r = best_match(rows2({{1, 0}, {2, 0.1}}), rows2({{1, 0}}));
  CHECK(r.many_to_one() == 2);

  CHECK(best_match(rows2({{0, 0}}), rows2({{1, 0}})).pairs[0].s_star == 0.0);
  CHECK_THROWS_AS(best_match(Matrix(0, 2), rows2({{1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(best_match(rows2({{1, 0}}), Matrix::Ones(1, 3)), std::invalid_argument);
}

TEST_CASE("confidence weights") {
  MatchResult one{{{0, 0, 0.3}}, {0}};
  CHECK(confidence_weights(one, 0.01)[0] == 1.0);

  MatchResult eq{{{0, 0, 0.4}, {1, 1, 0.4}}, {0, 1}};
  CHECK(confidence_weights(eq, 0.1) == Vector::Constant(2, 0.5));

  MatchResult two{{{0, 0, 1.0}, {1, 0, 0.5}}, {0, 1}};
  const Vector a = confidence_weights(two, 0.5);
  CHECK(a[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(a[1] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(a.sum() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(confidence_weights(MatchResult{{{0, 0, -0.2}}, {}}, 0.1), std::invalid_argument);
}

TEST_CASE("area weights") {
  const Vector w = area_weights(Vector::Constant(2, 0.5), (Vector(2) << 100, 300).finished());
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  CHECK(area_weights(Vector::Ones(1), Vector::Constant(1, 7.0))[0] == 1.0);
  const Vector alpha = (Vector(3) << 0.2, 0.3, 0.5).finished();
  CHECK(area_weights(alpha, Vector::Constant(3, 4.0)).isApprox(alpha));
}

TEST_CASE("set score examples") {
  std::mt19937_64 rng(1);
  const Matrix E = t3s::test::random_matrix(4, 5, rng);
  const Vector area = Vector::LinSpaced(4, 1, 4);
  CHECK(set_score(E, area, E, 0.1, 0.0).value == doctest::Approx(1.0).epsilon(1e-15));

  const SetScore orth = set_score(rows2({{1, 0}}), Vector::Ones(1), rows2({{0, 1}}), 0.1, 0.0);
  CHECK(orth.value == 0.0);
  CHECK(orth.degenerate);

  const SetScore empty = set_score(Matrix(0, 2), Vector(0), rows2({{0, 1}}), 0.1, 0.0);
  CHECK(empty.value == 0.0);
  CHECK(empty.degenerate);
}

TEST_CASE("set score equals the naive oracle") {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double worst = 0.0;
  for (int seed = 0; seed < 1000; ++seed) {
    const Eigen::Index n1 = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Eigen::Index n2 = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 16);
    const Matrix F1 = t3s::test::random_matrix(n1, d, rng);
    const Matrix F2 = t3s::test::random_matrix(n2, d, rng);
    Vector area(n1);
    for (Eigen::Index i = 0; i < n1; ++i) area[i] = 1000.0 * u(rng);
    const double tau = u(rng);
    const double got = set_score(F1, area, F2, tau, 0.0).value;
    worst = std::max(worst, std::abs(got - naive_set_score(F1, area, F2, tau, 0.0)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("set score invariances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n1 = 1 + static_cast<Eigen::Index>(rng() % 6), n2 = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Matrix F1 = t3s::test::random_matrix(n1, 5, rng);
    const Matrix F2 = t3s::test::random_matrix(n2, 5, rng);
    const Vector area = Vector::LinSpaced(n1, 1, 50);
    const SetScore base = set_score(F1, area, F2, 0.1, 0.0);

    Vector c1(n1), c2(n2);
    std::uniform_real_distribution<double> pos(0.1, 10.0);
    for (Eigen::Index i = 0; i < n1; ++i) c1[i] = pos(rng);
    for (Eigen::Index j = 0; j < n2; ++j) c2[j] = pos(rng);
    const MatchResult m0 = best_match(F1, F2);
    const MatchResult m1 = best_match(c1.asDiagonal() * F1, c2.asDiagonal() * F2);
    for (std::size_t i = 0; i < m0.pairs.size(); ++i) CHECK(m0.pairs[i].j_star == m1.pairs[i].j_star);
    CHECK(set_score(c1.asDiagonal() * F1, area, c2.asDiagonal() * F2, 0.1, 0.0).value ==
          doctest::Approx(base.value).epsilon(1e-12));

    Eigen::PermutationMatrix<Eigen::Dynamic> p1(n1), p2(n2);
    p1.setIdentity();
    p2.setIdentity();
    std::shuffle(p1.indices().data(), p1.indices().data() + n1, rng);
    std::shuffle(p2.indices().data(), p2.indices().data() + n2, rng);
    CHECK(set_score(p1 * F1, p1 * area, p2 * F2, 0.1, 0.0).value == doctest::Approx(base.value).epsilon(1e-12));

    CHECK(set_score(F1, area, F1, 0.1, 0.0).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(base.value <= 1.0 + 1e-15);
  }
}

TEST_CASE("variance fusion") {
  const Matrix a = rows2({{0, 0}, {2, 0}});
  const FusionWeights eq = variance_fusion(a, a, a, a, 0.5);
  CHECK(eq.w_fg == doctest::Approx(2.0 / 3.0));
  CHECK(eq.w_bg == doctest::Approx(1.0 / 3.0));

  const Matrix flat = rows2({{1, 1}, {1, 1}});
  const FusionWeights no_bg = variance_fusion(a, a, flat, flat, 0.5);
  CHECK(no_bg.w_fg == 1.0);
  CHECK(no_bg.w_bg == 0.0);

  const FusionWeights fallback = variance_fusion(flat, flat, flat, flat, 0.5);
  CHECK(fallback.w_fg == 1.0);
  CHECK(fallback.w_bg == 0.0);

  CHECK(mean_feature_variance(a) == doctest::Approx(0.5));
  CHECK(mean_feature_variance(Matrix(rows2({{3, 4}}))) == 0.0);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const FusionWeights fw = variance_fusion(t3s::test::random_matrix(3, 4, rng), t3s::test::random_matrix(2, 4, rng),
                                             t3s::test::random_matrix(4, 4, rng), t3s::test::random_matrix(1, 4, rng), 0.5);
    CHECK(std::abs(fw.w_fg + fw.w_bg - 1.0) <= 1e-12);
    CHECK(fw.w_fg >= 0.0);
    CHECK(fw.w_bg >= 0.0);
  }
}

TEST_CASE("entity score") {
  const FusionWeights fw{2.0 / 3.0, 1.0 / 3.0, 0, 0};
  CHECK(entity_score(0.9, 0.3, fw) == doctest::Approx(0.7));
  CHECK(entity_score(0.4, 0.4, fw) == doctest::Approx(0.4));
  CHECK(entity_score(0.9, 0.3, FusionWeights{1.0, 0.0, 0, 0}) == 0.9);
  CHECK(entity_score(0.8, 0.3, fw) >= entity_score(0.7, 0.3, fw));
  CHECK(entity_score(0.8, 0.4, fw) >= entity_score(0.8, 0.3, fw));
}

}  // TEST_SUITE
