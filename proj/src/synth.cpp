#include "t3s/synth.hpp"

#include "t3s/io.hpp"
#include "t3s/matching.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace t3s {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (seed, salt).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(salt)));
}

Vector gaussian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

Vector area_weighted_global(const EntitySet& es) {
  Vector g = Vector::Zero(es.feature_dim);
  for (const Entity& e : es.entities) g += e.area * e.feature;
  const double n = g.norm();
  return n > 0.0 ? Vector(g / n) : Vector(Vector::Unit(es.feature_dim, 0));
}

PairInput pair_from(const Scene& scene, EntitySet dist_entities, SemanticAnnotation dist_ann) {
  dist_entities.image_id = scene.entities.image_id + "-variant";
  dist_ann.image_id = dist_entities.image_id;
  return PairInput{{scene.entities, scene.annotation}, {std::move(dist_entities), std::move(dist_ann)}};
}

Scene as_scene(const PairSide& side, int n_foreground) {
  return Scene{side.entities, side.annotation, n_foreground};
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  std::shuffle(v.begin(), v.end(), rng);
}

std::vector<int> iota(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

const SynthVocab& synth_vocab() {
  static const SynthVocab vocab = [] {
    SynthVocab v;
    const std::vector<std::pair<std::string, std::string>> classes = {
        {"horse", "zebra"}, {"dog", "wolf"},   {"cat", "tiger"},  {"person", "child"},
        {"car", "truck"},   {"tree", "bush"},  {"bench", "sofa"}, {"bird", "eagle"},
        {"boat", "ship"},   {"kite", "balloon"}, {"cup", "mug"},  {"chair", "stool"}};
    v.predicates = {"near", "on", "under", "behind", "holding", "riding", "beside", "above", "facing", "inside"};
    const std::vector<std::string> extras = {"stone", "cloud", "lamp", "bottle"};

    const auto nc = static_cast<Eigen::Index>(classes.size());
    const auto dim = 2 * nc + static_cast<Eigen::Index>(v.predicates.size() + extras.size());
    v.table = EmbeddingTable(dim);
    Eigen::Index slot = 0;
    for (Eigen::Index k = 0; k < nc; ++k) {
      const auto& [base, rel] = classes[static_cast<std::size_t>(k)];
      v.table.insert(base, Vector::Unit(dim, k));
      v.table.insert(rel, 0.8 * Vector::Unit(dim, k) + 0.6 * Vector::Unit(dim, nc + k));
      v.classes.push_back(base);
      v.related[base] = rel;
    }
    slot = 2 * nc;
    for (const auto& p : v.predicates) v.table.insert(p, Vector::Unit(dim, slot++));
    for (const auto& w : extras) v.table.insert(w, Vector::Unit(dim, slot++));
    return v;
  }();
  return vocab;
}

Scene gen_scene(std::uint64_t seed, const SceneOptions& opt, const SynthVocab& vocab) {
  if (opt.n_entities < 1) throw std::invalid_argument("gen_scene: n_entities must be >= 1");
  if (opt.n_background < 0) throw std::invalid_argument("gen_scene: n_background must be >= 0");
  if (opt.dim < 2) throw std::invalid_argument("gen_scene: dim must be >= 2");
  if (vocab.classes.size() < 2 || vocab.predicates.empty()) throw std::invalid_argument("gen_scene: vocabulary too small");
  if (static_cast<std::size_t>(opt.n_entities) > vocab.classes.size()) {
    throw std::invalid_argument("gen_scene: more entities than distinct class words");
  }

  auto rng = stream(seed, 0x5CE7E);
  const int n = opt.n_entities;
  const int total = n + opt.n_background;

  Scene scene;
  scene.n_foreground = n;
  EntitySet& es = scene.entities;
  es.image_id = "scene-" + std::to_string(seed);
  es.feature_dim = opt.dim;

  // well-separated unit directions: |cos| <= 0.5 to every earlier entity
  std::vector<Vector> dirs;
  for (int attempts = 0; static_cast<int>(dirs.size()) < total; ++attempts) {
    if (attempts > 10000) throw std::invalid_argument("gen_scene: cannot place separated directions in this dim");
    Vector v = gaussian(opt.dim, rng).normalized();
    bool ok = std::all_of(dirs.begin(), dirs.end(), [&](const Vector& u) { return std::abs(u.dot(v)) <= 0.5; });
    if (ok) dirs.push_back(std::move(v));
  }
  for (int i = 0; i < total; ++i) {
    Entity e;
    const bool fg = i < n;
    e.id = (fg ? "e" : "b") + std::to_string(fg ? i : i - n);
    e.feature = dirs[static_cast<std::size_t>(i)];
    e.area = log_uniform(10.0, 1e4, rng);
    es.entities.push_back(std::move(e));
  }
  es.global_feature = area_weighted_global(es);

  SemanticAnnotation& ann = scene.annotation;
  ann.image_id = es.image_id;
  std::vector<std::string> pool = vocab.classes;
  shuffle(pool, rng);
  ann.classes.assign(pool.begin(), pool.begin() + n);

  const int max_pairs = n * (n - 1);
  const int r = std::min(opt.n_relations < 0 ? n - 1 : opt.n_relations, max_pairs);
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v) pairs.emplace_back(u, v);
    }
  }
  shuffle(pairs, rng);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.predicates.size() - 1);
  for (int k = 0; k < r; ++k) {
    const auto [u, v] = pairs[static_cast<std::size_t>(k)];
    ann.relations.push_back({ann.classes[static_cast<std::size_t>(u)], vocab.predicates[pick(rng)],
                             ann.classes[static_cast<std::size_t>(v)]});
  }
  return scene;
}

// ---------------------------------------------------------------------------

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::noise: return "noise";
    case ScenarioKind::entity_shift: return "entity_shift";
    case ScenarioKind::relation_shift: return "relation_shift";
    case ScenarioKind::combined: return "combined";
  }
  return "?";
}

const char* to_string(ShiftDistance d) { return d == ShiftDistance::related ? "related" : "unrelated"; }

ScenarioKind parse_scenario_kind(const std::string& s) {
  for (ScenarioKind k : {ScenarioKind::noise, ScenarioKind::entity_shift, ScenarioKind::relation_shift,
                         ScenarioKind::combined}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("unknown scenario kind '" + s + "'");
}

ShiftDistance parse_shift_distance(const std::string& s) {
  if (s == "related") return ShiftDistance::related;
  if (s == "unrelated") return ShiftDistance::unrelated;
  throw ParseError("unknown shift distance '" + s + "'");
}

Scenario perturb_noise(const Scene& scene, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("perturb_noise: sigma must be non-negative");
  Scenario sc;
  sc.kind = ScenarioKind::noise;
  sc.magnitude = sigma;
  sc.population = static_cast<int>(scene.entities.size());
  sc.seed = seed;
  if (sigma == 0.0) {
    sc.pair = pair_from(scene, scene.entities, scene.annotation);
    return sc;
  }

  const EntitySet& base = scene.entities;
  const Matrix F = feature_matrix(base);
  const double scale = sigma / std::sqrt(static_cast<double>(base.feature_dim));
  auto jitter = [&](const Vector& v, std::mt19937_64& rng) {
    const double n = v.norm();
    Vector out = v + scale * n * gaussian(v.size(), rng);
    const double m = out.norm();
    return m > 0.0 ? Vector(out * (n / m)) : v;
  };

  for (int attempt = 0; attempt < kNoiseRetries; ++attempt) {
    auto rng = stream(seed, 0x7015E000ULL + static_cast<std::uint64_t>(attempt));
    EntitySet variant = base;
    for (Entity& e : variant.entities) e.feature = jitter(e.feature, rng);
    variant.global_feature = jitter(base.global_feature, rng);

    const MatchResult m = best_match(F, feature_matrix(variant), -2.0);
    const bool kept = std::all_of(m.pairs.begin(), m.pairs.end(), [](const MatchPair& p) { return p.i == p.j_star; });
    if (kept) {
      sc.pair = pair_from(scene, std::move(variant), scene.annotation);
      return sc;
    }
  }
  throw RetryExhausted("perturb_noise: best-match correspondence lost at sigma " + std::to_string(sigma) +
                       " after " + std::to_string(kNoiseRetries) + " attempts");
}

Scenario perturb_entity_shift(const Scene& scene, int k, ShiftDistance distance, std::uint64_t seed,
                              const SynthVocab& vocab) {
  const int n = scene.n_foreground;
  if (k < 0 || k > n) throw std::invalid_argument("perturb_entity_shift: k exceeds the foreground entity count");
  Scenario sc;
  sc.kind = ScenarioKind::entity_shift;
  sc.magnitude = k;
  sc.distance = distance;
  sc.population = n;
  sc.seed = seed;
  if (k == 0) {
    sc.pair = pair_from(scene, scene.entities, scene.annotation);
    return sc;
  }

  const EntitySet& base = scene.entities;
  const auto d = base.feature_dim;
  auto rng = stream(seed, distance == ShiftDistance::related ? 0xE5A1ULL : 0xE5B2ULL);
  std::vector<int> order = iota(n);
  shuffle(order, rng);

  // orthonormal basis of the span of every base feature
  const Matrix F = feature_matrix(base);
  Eigen::HouseholderQR<Matrix> qr(F.transpose());
  const Eigen::Index rank = std::min<Eigen::Index>(F.rows(), d);
  const Matrix Q = qr.householderQ() * Matrix::Identity(d, rank);

  std::vector<std::string> unrelated_pool;
  if (distance == ShiftDistance::unrelated) {
    if (rank >= d) throw std::invalid_argument("perturb_entity_shift: no orthogonal complement left in this dim");
    const std::set<std::string> used(scene.annotation.classes.begin(), scene.annotation.classes.end());
    for (const std::string& w : vocab.table.words()) {
      bool is_related_word = false;
      for (const auto& [base_word, rel] : vocab.related) is_related_word |= (rel == w);
      const bool is_predicate = std::find(vocab.predicates.begin(), vocab.predicates.end(), w) != vocab.predicates.end();
      if (!used.count(w) && !is_related_word && !is_predicate) unrelated_pool.push_back(w);
    }
    shuffle(unrelated_pool, rng);
    if (unrelated_pool.size() < static_cast<std::size_t>(n)) {
      throw std::invalid_argument("perturb_entity_shift: vocabulary has too few unrelated words");
    }
  }

  // draw replacements for every position so shifts are nested in k
  std::vector<Vector> new_features(static_cast<std::size_t>(n));
  std::vector<std::string> new_classes(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> angle(15.0, 30.0);
  for (int t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
    const Vector& f = base.entities[i].feature;
    const double norm = f.norm();
    const Vector fu = f / norm;
    if (distance == ShiftDistance::related) {
      Vector u = gaussian(d, rng);
      u -= u.dot(fu) * fu;
      u.normalize();
      const double th = angle(rng) * std::numbers::pi / 180.0;
      new_features[i] = norm * (std::cos(th) * fu + std::sin(th) * u);
      const auto it = vocab.related.find(scene.annotation.classes[i]);
      if (it == vocab.related.end()) {
        throw std::invalid_argument("perturb_entity_shift: no related word for '" + scene.annotation.classes[i] + "'");
      }
      new_classes[i] = it->second;
    } else {
      Vector u = gaussian(d, rng);
      u -= Q * (Q.transpose() * u);
      u -= Q * (Q.transpose() * u);
      new_features[i] = norm * u.normalized();
      new_classes[i] = unrelated_pool[static_cast<std::size_t>(t)];
    }
  }

  EntitySet variant = base;
  SemanticAnnotation ann = scene.annotation;
  std::map<std::string, std::string> renamed;
  for (int t = 0; t < k; ++t) {
    const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(t)]);
    variant.entities[i].feature = new_features[i];
    renamed[ann.classes[i]] = new_classes[i];
    ann.classes[i] = new_classes[i];
  }
  for (Relation& r : ann.relations) {
    if (auto it = renamed.find(r.subject); it != renamed.end()) r.subject = it->second;
    if (auto it = renamed.find(r.object); it != renamed.end()) r.object = it->second;
  }
  variant.global_feature = area_weighted_global(variant);
  sc.pair = pair_from(scene, std::move(variant), std::move(ann));
  return sc;
}

Scenario perturb_relation_shift(const Scene& scene, int k, std::uint64_t seed, const SynthVocab& vocab) {
  const int r = static_cast<int>(scene.annotation.relations.size());
  if (k < 0 || k > r) throw std::invalid_argument("perturb_relation_shift: k exceeds the relation count");
  Scenario sc;
  sc.kind = ScenarioKind::relation_shift;
  sc.magnitude = k;
  sc.population = r;
  sc.seed = seed;
  if (k == 0) {
    sc.pair = pair_from(scene, scene.entities, scene.annotation);
    return sc;
  }

  auto rng = stream(seed, 0x2E1A7ULL);
  std::vector<int> order = iota(r);
  shuffle(order, rng);

  std::set<std::string> used;
  for (const Relation& rel : scene.annotation.relations) used.insert(rel.predicate);
  std::vector<std::string> unused;
  for (const std::string& p : vocab.predicates) {
    if (!used.count(p)) unused.push_back(p);
  }
  if (unused.empty()) throw std::invalid_argument("perturb_relation_shift: every predicate word is already in use");
  shuffle(unused, rng);

  SemanticAnnotation ann = scene.annotation;
  for (int t = 0; t < k; ++t) {
    ann.relations[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])].predicate =
        unused[static_cast<std::size_t>(t) % unused.size()];
  }
  sc.pair = pair_from(scene, scene.entities, std::move(ann));
  return sc;
}

// ---------------------------------------------------------------------------
// Suites

std::vector<Scenario> constraint_suite(const SuiteParams& params, std::uint64_t seed) {
  std::vector<Scenario> out;
  for (int s = 0; s < params.seeds; ++s) {
    const std::uint64_t ss = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Scene scene = gen_scene(ss, params.scene);

    Scenario c1 = perturb_noise(scene, params.noise_sigma, ss);
    c1.group = "c1";
    out.push_back(std::move(c1));

    for (int k = 0; k <= scene.n_foreground; ++k) {
      Scenario c2 = perturb_entity_shift(scene, k, ShiftDistance::unrelated, ss);
      c2.group = "c2";
      out.push_back(std::move(c2));
    }
    const int r = static_cast<int>(scene.annotation.relations.size());
    for (int k = 0; k <= r; ++k) {
      Scenario c3 = perturb_relation_shift(scene, k, ss);
      c3.group = "c3";
      out.push_back(std::move(c3));
    }
  }

  // range fuzz over mixed perturbations and scene shapes
  auto rng = stream(seed, 0xF022ULL);
  std::uniform_int_distribution<int> n_dist(1, 6), bg_dist(0, 2), kind_dist(0, 3);
  std::uniform_real_distribution<double> sigma_dist(0.0, 0.5);
  for (int f = 0; f < params.fuzz_pairs; ++f) {
    const std::uint64_t fs = rng();
    SceneOptions opt = params.scene;
    opt.n_entities = n_dist(rng);
    opt.n_background = bg_dist(rng);
    opt.n_relations = -1;
    const Scene scene = gen_scene(fs, opt);
    const int n = scene.n_foreground;
    const int r = static_cast<int>(scene.annotation.relations.size());
    const auto distance = (rng() & 1U) ? ShiftDistance::related : ShiftDistance::unrelated;

    Scenario sc;
    switch (kind_dist(rng)) {
      case 0:
        try {
          sc = perturb_noise(scene, sigma_dist(rng), fs);
        } catch (const RetryExhausted&) {
          sc = perturb_entity_shift(scene, n, ShiftDistance::unrelated, fs);
        }
        break;
      case 1:
        sc = perturb_entity_shift(scene, std::uniform_int_distribution<int>(0, n)(rng), distance, fs);
        break;
      case 2:
        sc = perturb_relation_shift(scene, std::uniform_int_distribution<int>(0, r)(rng), fs);
        break;
      default: {
        const int ke = std::uniform_int_distribution<int>(0, n)(rng);
        const Scenario mid = perturb_entity_shift(scene, ke, distance, fs);
        const int kr = std::uniform_int_distribution<int>(0, r)(rng);
        const Scenario fin = perturb_relation_shift(as_scene(mid.pair.dist, n), kr, fs);
        sc = mid;
        sc.kind = ScenarioKind::combined;
        sc.magnitude = ke + kr;
        sc.pair.dist = fin.pair.dist;
        sc.pair.dist.entities.image_id = mid.pair.dist.entities.image_id;
        sc.pair.dist.annotation.image_id = mid.pair.dist.annotation.image_id;
        break;
      }
    }
    sc.group = "c4";
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<Scenario> three_level_suite(const SuiteParams& params, std::uint64_t seed) {
  std::vector<Scenario> out;
  for (int s = 0; s < params.seeds; ++s) {
    const std::uint64_t ss = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Scene scene = gen_scene(ss, params.scene);
    Scenario lvl1 = perturb_noise(scene, params.three_level_sigma, ss);
    Scenario lvl2 = perturb_entity_shift(scene, 1, ShiftDistance::related, ss);
    Scenario lvl3 = perturb_entity_shift(scene, 1, ShiftDistance::unrelated, ss);
    for (Scenario* sc : {&lvl1, &lvl2, &lvl3}) {
      sc->group = "three-level";
      sc->seed = ss;
      out.push_back(std::move(*sc));
    }
  }
  return out;
}

std::vector<Scenario> ablation_suite(const SuiteParams& params, std::uint64_t seed) {
  std::vector<Scenario> out;
  SceneOptions opt = params.scene;
  opt.n_background = std::max(opt.n_background, 3);
  for (int s = 0; s < params.seeds; ++s) {
    const std::uint64_t ss = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Scene scene = gen_scene(ss, opt);
    for (int k = 0; k <= scene.n_foreground; ++k) {
      Scenario sc = perturb_entity_shift(scene, k, ShiftDistance::unrelated, ss);
      sc.group = "ablation";
      out.push_back(std::move(sc));
    }
    const int r = static_cast<int>(scene.annotation.relations.size());
    for (int k = 0; k <= r; ++k) {
      Scenario sc = perturb_relation_shift(scene, k, ss);
      sc.group = "ablation";
      out.push_back(std::move(sc));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

namespace {

struct SideWriter {
  std::filesystem::path root;
  std::map<std::string, std::string> written;  // document text -> relative path
  int counter = 0;

  std::string put(const std::string& text, const char* stem) {
    if (auto it = written.find(text); it != written.end()) return it->second;
    char name[64];
    std::snprintf(name, sizeof name, "scenes/%06d_%s.json", counter++, stem);
    write_text_file(root / name, text);
    written.emplace(text, name);
    return name;
  }
};

}  // namespace

std::filesystem::path write_suite(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir) {
  if (scenarios.empty()) throw std::invalid_argument("write_suite: no scenarios");
  std::filesystem::create_directories(out_dir / "scenes");
  write_text_file(out_dir / "embeddings.txt", serialize_embedding_table(synth_vocab().table));
  write_text_file(out_dir / "fbd.json",
                  serialize_fbd_weights(lifting_weights(scenarios.front().pair.ref.entities.feature_dim)));

  SideWriter w{out_dir, {}, 0};
  Json list = Json::array();
  for (const Scenario& sc : scenarios) {
    Json item;
    item["group"] = sc.group;
    item["kind"] = to_string(sc.kind);
    item["magnitude"] = sc.magnitude;
    item["distance"] = to_string(sc.distance);
    item["population"] = sc.population;
    item["seed"] = sc.seed;
    item["ref"] = w.put(serialize_entity_set(sc.pair.ref.entities), "ref");
    item["dist"] = w.put(serialize_entity_set(sc.pair.dist.entities), "dist");
    item["ann_ref"] = w.put(serialize_annotation(sc.pair.ref.annotation), "ann_ref");
    item["ann_dist"] = w.put(serialize_annotation(sc.pair.dist.annotation), "ann_dist");
    list.push_back(std::move(item));
  }
  Json manifest;
  manifest["scenarios"] = std::move(list);
  manifest["embedding_table"] = "embeddings.txt";
  manifest["fbd_weights"] = "fbd.json";
  const auto path = out_dir / "manifest.json";
  write_text_file(path, manifest.dump(1) + "\n");
  return path;
}

LoadedSuite load_suite(const std::filesystem::path& dir_or_manifest) {
  const auto manifest_path = std::filesystem::is_directory(dir_or_manifest) ? dir_or_manifest / "manifest.json"
                                                                             : dir_or_manifest;
  const auto root = manifest_path.parent_path();
  const Json doc = [&] {
    try {
      return Json::parse(read_text_file(manifest_path));
    } catch (const Json::exception& e) {
      throw ParseError("suite manifest: " + std::string(e.what()));
    }
  }();
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw ParseError("suite manifest: missing 'scenarios' array");
  }
  if (!doc.contains("embedding_table") || !doc["embedding_table"].is_string()) {
    throw ParseError("suite manifest: missing 'embedding_table'");
  }

  LoadedSuite suite;
  suite.table = load_embedding_table(read_text_file(root / doc["embedding_table"].get<std::string>())).table;

  std::map<std::string, EntitySet> sets;
  std::map<std::string, SemanticAnnotation> anns;
  auto entity_set = [&](const std::string& rel) -> const EntitySet& {
    auto it = sets.find(rel);
    if (it == sets.end()) it = sets.emplace(rel, parse_entity_set(read_text_file(root / rel))).first;
    return it->second;
  };
  auto annotation = [&](const std::string& rel) -> const SemanticAnnotation& {
    auto it = anns.find(rel);
    if (it == anns.end()) it = anns.emplace(rel, parse_annotation(read_text_file(root / rel))).first;
    return it->second;
  };

  const Json& list = doc["scenarios"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Json& item = list[i];
    try {
      Scenario sc;
      sc.group = item.value("group", std::string());
      sc.kind = parse_scenario_kind(item.at("kind").get<std::string>());
      sc.magnitude = item.at("magnitude").get<double>();
      sc.distance = parse_shift_distance(item.value("distance", std::string("unrelated")));
      sc.population = item.value("population", 0);
      sc.seed = item.value("seed", std::uint64_t{0});
      sc.pair.ref = {entity_set(item.at("ref").get<std::string>()), annotation(item.at("ann_ref").get<std::string>())};
      sc.pair.dist = {entity_set(item.at("dist").get<std::string>()),
                      annotation(item.at("ann_dist").get<std::string>())};
      suite.scenarios.push_back(std::move(sc));
    } catch (const Json::exception& e) {
      throw ParseError("suite manifest: scenario " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("suite manifest: scenario " + std::to_string(i) + ": " + e.what());
    }
  }

  if (doc.contains("fbd_weights") && doc["fbd_weights"].is_string()) {
    suite.weights = parse_fbd_weights(read_text_file(root / doc["fbd_weights"].get<std::string>()));
  } else if (!suite.scenarios.empty()) {
    suite.weights = lifting_weights(suite.scenarios.front().pair.ref.entities.feature_dim);
  }
  return suite;
}

std::filesystem::path write_degradation_bench(int seeds, std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (seeds < 1) throw std::invalid_argument("write_degradation_bench: seeds must be >= 1");
  std::filesystem::create_directories(out_dir / "scenes");
  const SceneOptions opt;
  write_text_file(out_dir / "embeddings.txt", serialize_embedding_table(synth_vocab().table));
  write_text_file(out_dir / "fbd.json", serialize_fbd_weights(lifting_weights(opt.dim)));

  SideWriter w{out_dir, {}, 0};
  Json pairs = Json::array();
  auto add = [&](const Scenario& sc, const char* degradation, int level) {
    Json item;
    item["ref"] = w.put(serialize_entity_set(sc.pair.ref.entities), "ref");
    item["dist"] = w.put(serialize_entity_set(sc.pair.dist.entities), "dist");
    item["ann_ref"] = w.put(serialize_annotation(sc.pair.ref.annotation), "ann_ref");
    item["ann_dist"] = w.put(serialize_annotation(sc.pair.dist.annotation), "ann_dist");
    item["degradation"] = degradation;
    item["level"] = level;
    pairs.push_back(std::move(item));
  };
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t ss = splitmix64(seed + static_cast<std::uint64_t>(s));
    const Scene scene = gen_scene(ss, opt);
    for (int level = 1; level <= 5; ++level) {
      add(perturb_noise(scene, 0.04 * level, ss), "noise", level);
      add(perturb_entity_shift(scene, level - 1, ShiftDistance::related, ss), "erosion", level);
    }
  }
  Json manifest;
  manifest["pairs"] = std::move(pairs);
  manifest["embedding_table"] = "embeddings.txt";
  manifest["fbd_weights"] = "fbd.json";
  manifest["config"] = Json::object();
  const auto path = out_dir / "manifest.json";
  write_text_file(path, manifest.dump(1) + "\n");
  return path;
}

FbdTrainingData fbd_training_data(int n_sets, int entities_per_set, Eigen::Index dim, std::uint64_t seed) {
  if (n_sets < 1 || entities_per_set < 1 || dim < 1) throw std::invalid_argument("fbd_training_data: bad sizes");
  auto rng = stream(seed, 0xFBDULL);
  const Vector mu_fg = 1.5 * gaussian(dim, rng).normalized();
  const Vector mu_bg = -mu_fg;
  std::normal_distribution<double> noise(0.0, 0.5);
  std::bernoulli_distribution coin(0.5);

  FbdTrainingData data;
  for (int s = 0; s < n_sets; ++s) {
    LabeledSet ls;
    ls.set.image_id = "train-" + std::to_string(s);
    ls.set.feature_dim = dim;
    for (int i = 0; i < entities_per_set; ++i) {
      const int y = coin(rng) ? 1 : 0;
      Entity e;
      e.id = "e" + std::to_string(i);
      e.feature = y ? mu_fg : mu_bg;
      for (Eigen::Index c = 0; c < dim; ++c) e.feature[c] += noise(rng);
      e.area = y ? log_uniform(10.0, 1e3, rng) : log_uniform(1e3, 1e5, rng);
      ls.set.entities.push_back(std::move(e));
      ls.labels.push_back(y);
    }
    ls.set.global_feature = area_weighted_global(ls.set);
    data.sets.push_back(std::move(ls));
  }
  return data;
}

void write_fbd_training_data(const FbdTrainingData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "sets");
  Json labels = Json::object();
  for (std::size_t s = 0; s < data.sets.size(); ++s) {
    const LabeledSet& ls = data.sets[s];
    char name[64];
    std::snprintf(name, sizeof name, "sets/%04zu.json", s);
    write_text_file(out_dir / name, serialize_entity_set(ls.set));
    Json& m = labels[ls.set.image_id];
    m = Json::object();
    for (std::size_t i = 0; i < ls.labels.size(); ++i) m[ls.set.entities[i].id] = ls.labels[i];
  }
  write_text_file(out_dir / "labels.json", labels.dump(1) + "\n");
}

}  // namespace t3s
