#pragma once

// Deterministic synthetic scenes with controlled embedding geometry, and the
// perturbation operators that turn them into constraint scenarios.

#include "t3s/scorer.hpp"
#include "t3s/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace t3s {

/// Word table over an orthonormal basis. Every base class has a planted
/// related word at cosine 0.8; all other word pairs are orthogonal.
struct SynthVocab {
  EmbeddingTable table;
  std::vector<std::string> classes;
  std::vector<std::string> predicates;
  std::map<std::string, std::string> related;  // class -> related word
};

const SynthVocab& synth_vocab();

struct SceneOptions {
  int n_entities = 5;      // foreground entities, each with a class label
  Eigen::Index dim = 16;
  int n_relations = -1;    // -1 selects n_entities - 1
  int n_background = 0;    // unlabeled clutter entities
};

/// annotation.classes[i] labels entities[i] for i < n_entities; background
/// entities follow and carry no label.
struct Scene {
  EntitySet entities;
  SemanticAnnotation annotation;
  int n_foreground = 0;
};

Scene gen_scene(std::uint64_t seed, const SceneOptions& options, const SynthVocab& vocab = synth_vocab());

enum class ScenarioKind { noise, entity_shift, relation_shift, combined };
enum class ShiftDistance { related, unrelated };

const char* to_string(ScenarioKind k);
const char* to_string(ShiftDistance d);
ScenarioKind parse_scenario_kind(const std::string& s);
ShiftDistance parse_shift_distance(const std::string& s);

struct Scenario {
  std::string group;  // which check consumes it: c1, c2, c3, c4, three-level, ablation
  ScenarioKind kind = ScenarioKind::noise;
  double magnitude = 0.0;
  ShiftDistance distance = ShiftDistance::unrelated;
  int population = 0;  // entities (or relations) eligible for shifting
  std::uint64_t seed = 0;
  PairInput pair;
};

/// Noise retries ran out: the perturbation destroyed best-match correspondence.
class RetryExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNoiseRetries = 16;

/// Relative Gaussian noise on every feature and the global vector, renormalized.
/// Retries with a new sub-seed until best matches are preserved.
Scenario perturb_noise(const Scene& scene, double sigma, std::uint64_t seed);

/// Shifts the first k foreground entities of a seeded permutation, so that
/// shifts at increasing k are nested for a fixed seed.
Scenario perturb_entity_shift(const Scene& scene, int k, ShiftDistance distance, std::uint64_t seed,
                              const SynthVocab& vocab = synth_vocab());

/// Replaces k predicates with words orthogonal to every predicate of the scene.
Scenario perturb_relation_shift(const Scene& scene, int k, std::uint64_t seed,
                                const SynthVocab& vocab = synth_vocab());

struct SuiteParams {
  int seeds = 100;
  SceneOptions scene;
  double noise_sigma = 0.01;
  int fuzz_pairs = 500;
  double three_level_sigma = 0.05;
};

std::vector<Scenario> constraint_suite(const SuiteParams& params, std::uint64_t seed);
std::vector<Scenario> three_level_suite(const SuiteParams& params, std::uint64_t seed);
/// Scenes with planted background clutter; entity shifts on the foreground and
/// relation shifts, each at every count.
std::vector<Scenario> ablation_suite(const SuiteParams& params, std::uint64_t seed);

/// Writes scenario documents, the embedding table, default FBD weights and
/// manifest.json under out_dir. Returns the manifest path.
std::filesystem::path write_suite(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir);

struct LoadedSuite {
  std::vector<Scenario> scenarios;
  EmbeddingTable table;
  FbdWeights weights;
};

LoadedSuite load_suite(const std::filesystem::path& dir_or_manifest);

/// Synthetic degradation benchmark: two degradations x five levels with
/// strictly increasing magnitude. Writes manifest.json and returns its path.
std::filesystem::path write_degradation_bench(int seeds, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Labeled fg/bg training sets written as entity-set files plus labels.json.
struct FbdTrainingData {
  std::vector<LabeledSet> sets;
};
FbdTrainingData fbd_training_data(int n_sets, int entities_per_set, Eigen::Index dim, std::uint64_t seed);
void write_fbd_training_data(const FbdTrainingData& data, const std::filesystem::path& out_dir);

}  // namespace t3s
