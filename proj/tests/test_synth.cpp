#include "support.hpp"

#include "t3s/semantics.hpp"

#include <doctest.h>

#include <set>

using namespace t3s;

namespace {

ScoreReport score(const PairInput& p) {
  return score_pair(p, lifting_weights(p.ref.entities.feature_dim), &synth_vocab().table, {});
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("vocabulary geometry") {
  const SynthVocab& v = synth_vocab();
  CHECK(v.classes.size() == 12);
  for (const auto& [base, rel] : v.related) CHECK(cosine(*v.table.find(base), *v.table.find(rel)) == doctest::Approx(0.8));
  for (std::size_t a = 0; a < v.classes.size(); ++a)
    for (std::size_t b = a + 1; b < v.classes.size(); ++b)
      CHECK(cosine(*v.table.find(v.classes[a]), *v.table.find(v.classes[b])) == 0.0);
  for (const std::string& p : v.predicates) CHECK(cosine(*v.table.find(p), *v.table.find("horse")) == 0.0);
}

TEST_CASE("scene generation") {
  const Scene a = gen_scene(7, SceneOptions{});
  const Scene b = gen_scene(7, SceneOptions{});
  CHECK(serialize_entity_set(a.entities) == serialize_entity_set(b.entities));
  CHECK(serialize_annotation(a.annotation) == serialize_annotation(b.annotation));

  CHECK(gen_scene(3, SceneOptions{1}).annotation.relations.empty());

  std::set<std::string> ids;
  for (const Entity& e : a.entities.entities) {
    ids.insert(e.id);
    CHECK(e.feature.norm() == doctest::Approx(1.0));
    CHECK(e.area >= 10.0);
    CHECK(e.area <= 1e4);
  }
  CHECK(ids.size() == 5);
  CHECK(a.annotation.classes.size() == 5);
  CHECK(std::set<std::string>(a.annotation.classes.begin(), a.annotation.classes.end()).size() == 5);
  CHECK(a.annotation.relations.size() >= 1);
  CHECK(a.entities.global_feature.norm() == doctest::Approx(1.0));
  CHECK_NOTHROW(validate_entity_set(a.entities));
  for (std::size_t i = 0; i < a.entities.size(); ++i)
    for (std::size_t j = i + 1; j < a.entities.size(); ++j)
      CHECK(std::abs(a.entities.entities[i].feature.dot(a.entities.entities[j].feature)) <= 0.5);

  CHECK_THROWS_AS(gen_scene(1, SceneOptions{0}), std::invalid_argument);
  CHECK_THROWS_AS(gen_scene(1, SceneOptions{13}), std::invalid_argument);
}

TEST_CASE("noise perturbation") {
  const Scene s = gen_scene(5, SceneOptions{});
  const Scenario zero = perturb_noise(s, 0.0, 5);
  CHECK(serialize_entity_set(zero.pair.dist.entities).find("\"feature_dim\"") != std::string::npos);
  CHECK(feature_matrix(zero.pair.dist.entities) == feature_matrix(s.entities));
  CHECK(zero.pair.dist.entities.global_feature == s.entities.global_feature);

  const Scenario small = perturb_noise(s, 0.01, 5);
  const MatchResult m = best_match(feature_matrix(s.entities), feature_matrix(small.pair.dist.entities), -2.0);
  for (const MatchPair& p : m.pairs) CHECK(p.i == p.j_star);
  CHECK(small.pair.dist.annotation.classes == s.annotation.classes);
  CHECK(small.pair.dist.entities.entities[0].feature != s.entities.entities[0].feature);

  const Scene tight = gen_scene(5, SceneOptions{8, 16});
  CHECK_THROWS_AS(perturb_noise(tight, 10.0, 5), RetryExhausted);
  CHECK_THROWS_AS(perturb_noise(s, -1.0, 5), std::invalid_argument);
}

TEST_CASE("entity shift") {
  const Scene s = gen_scene(11, SceneOptions{});
  const Scenario zero = perturb_entity_shift(s, 0, ShiftDistance::unrelated, 11);
  CHECK(serialize_entity_set(zero.pair.dist.entities) == serialize_entity_set([&] {
          EntitySet e = s.entities;
          e.image_id = zero.pair.dist.entities.image_id;
          return e;
        }()));

  const Scenario all = perturb_entity_shift(s, 5, ShiftDistance::unrelated, 11);
  const SetScore raw = set_score(feature_matrix(s.entities), area_vector(s.entities),
                                 feature_matrix(all.pair.dist.entities), 0.1, 0.0);
  CHECK(raw.value <= 1e-12);
  CHECK(score(all.pair).eps_f <= 1e-6);
  for (const Entity& e : all.pair.dist.entities.entities)
    for (const Entity& o : s.entities.entities) CHECK(std::abs(cosine(e.feature, o.feature)) <= 1e-12);

  for (int k = 1; k <= 5; ++k) {
    const Scenario rel = perturb_entity_shift(s, k, ShiftDistance::related, 11);
    const Scenario unr = perturb_entity_shift(s, k, ShiftDistance::unrelated, 11);
    CHECK(score(rel.pair).alpha_cls > score(unr.pair).alpha_cls);
  }

  const Scenario rel = perturb_entity_shift(s, 5, ShiftDistance::related, 11);
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    const double c = cosine(rel.pair.dist.entities.entities[i].feature, s.entities.entities[i].feature);
    CHECK(c >= std::cos(30.0 * M_PI / 180.0) - 1e-12);
    CHECK(c <= std::cos(15.0 * M_PI / 180.0) + 1e-12);
  }

  // shifts are nested in k and relations follow renamed classes
  const Scenario k2 = perturb_entity_shift(s, 2, ShiftDistance::unrelated, 11);
  const Scenario k3 = perturb_entity_shift(s, 3, ShiftDistance::unrelated, 11);
  int kept = 0;
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    if (k2.pair.dist.annotation.classes[i] != s.annotation.classes[i]) {
      CHECK(k3.pair.dist.annotation.classes[i] == k2.pair.dist.annotation.classes[i]);
    } else {
      ++kept;
    }
  }
  CHECK(kept == 3);
  const std::set<std::string> cls(k3.pair.dist.annotation.classes.begin(), k3.pair.dist.annotation.classes.end());
  for (const Relation& r : k3.pair.dist.annotation.relations) {
    CHECK(cls.count(r.subject) == 1);
    CHECK(cls.count(r.object) == 1);
  }

  CHECK_THROWS_AS(perturb_entity_shift(s, 6, ShiftDistance::related, 1), std::invalid_argument);
  CHECK_THROWS_AS(perturb_entity_shift(s, -1, ShiftDistance::related, 1), std::invalid_argument);
}

TEST_CASE("relation shift") {
  const Scene s = gen_scene(21, SceneOptions{4, 16, 3});
  REQUIRE(s.annotation.relations.size() == 3);
  CHECK(score(perturb_relation_shift(s, 0, 21).pair).eps_r == 1.0);
  CHECK(score(perturb_relation_shift(s, 1, 21).pair).eps_r < 1.0);
  const Scenario all = perturb_relation_shift(s, 3, 21);
  CHECK(score(all.pair).eps_r <= 2.0 / 3.0 + 1e-12);
  CHECK(feature_matrix(all.pair.dist.entities) == feature_matrix(s.entities));
  CHECK(all.pair.dist.annotation.classes == s.annotation.classes);
  CHECK_THROWS_AS(perturb_relation_shift(s, 4, 21), std::invalid_argument);
}

TEST_CASE("suites round trip through files") {
  SuiteParams p;
  p.seeds = 3;
  p.fuzz_pairs = 20;
  std::vector<Scenario> suite = constraint_suite(p, 9);
  const std::vector<Scenario> again = constraint_suite(p, 9);
  REQUIRE(suite.size() == again.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(serialize_entity_set(suite[i].pair.dist.entities) == serialize_entity_set(again[i].pair.dist.entities));
  }

  const auto dir = t3s::test::scratch_dir("suite");
  const auto manifest = write_suite(suite, dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir / "scenes")) {
    const std::string text = read_text_file(entry.path());
    if (entry.path().filename().string().find("ann") != std::string::npos) {
      CHECK_NOTHROW(parse_annotation(text));
    } else {
      CHECK_NOTHROW(parse_entity_set(text));
    }
  }
  const LoadedSuite loaded = load_suite(manifest);
  REQUIRE(loaded.scenarios.size() == suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(loaded.scenarios[i].group == suite[i].group);
    CHECK(loaded.scenarios[i].kind == suite[i].kind);
    CHECK(loaded.scenarios[i].magnitude == suite[i].magnitude);
    CHECK(loaded.scenarios[i].seed == suite[i].seed);
    const ScoreReport a = score_pair(loaded.scenarios[i].pair, loaded.weights, &loaded.table, {});
    const ScoreReport b = score(suite[i].pair);
    CHECK(a.t3s == b.t3s);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("degradation bench files and training data") {
  const auto dir = t3s::test::scratch_dir("degr");
  const auto manifest = write_degradation_bench(2, 4, dir);
  const Json doc = Json::parse(read_text_file(manifest));
  CHECK(doc["pairs"].size() == 2 * 2 * 5);

  const auto train = t3s::test::scratch_dir("train");
  write_fbd_training_data(fbd_training_data(3, 4, 6, 1), train);
  const auto sets = load_labeled_sets(train / "sets", parse_fg_labels(read_text_file(train / "labels.json")));
  CHECK(sets.size() == 3);
  CHECK(sets[0].labels.size() == 4);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(train);
}

}  // TEST_SUITE
