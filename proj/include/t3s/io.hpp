#pragma once

#include "t3s/fbd.hpp"
#include "t3s/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace t3s {

using Json = nlohmann::json;

// Entity-set documents.
EntitySet parse_entity_set(std::string_view text);
std::string serialize_entity_set(const EntitySet& es);
/// Checks every EntitySet invariant; throws ValidationError naming the entity index.
void validate_entity_set(const EntitySet& es);

// Annotation documents. Labels are normalized on load.
SemanticAnnotation parse_annotation(std::string_view text);
std::string serialize_annotation(const SemanticAnnotation& ann);

struct EmbeddingLoad {
  EmbeddingTable table;
  std::vector<std::string> warnings;
};

/// word2vec text format: header "vocab_size dim", then "word v1 ... v_dim" rows.
EmbeddingLoad load_embedding_table(std::string_view text);
std::string serialize_embedding_table(const EmbeddingTable& table);

FbdWeights parse_fbd_weights(std::string_view text);
std::string serialize_fbd_weights(const FbdWeights& w);

/// Unknown keys are rejected. Missing keys keep their defaults from `base`.
MetricConfig parse_metric_config(std::string_view text, MetricConfig base = {});
Json metric_config_to_json(const MetricConfig& cfg);

Json score_report_to_json(const ScoreReport& r);
std::string score_report_csv_header();
std::string score_report_csv_row(const ScoreReport& r);

/// {"image_id": {"entity_id": 0|1}}
using FgLabels = std::map<std::string, std::map<std::string, int>>;
FgLabels parse_fg_labels(std::string_view text);

/// Every *.json entity-set file in `dir` (sorted by name) joined with its labels.
std::vector<LabeledSet> load_labeled_sets(const std::filesystem::path& dir, const FgLabels& labels);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, std::string_view text);

}  // namespace t3s
