#pragma once

#include "t3s/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace t3s {

/// Lowercase, trim, collapse internal whitespace runs to a single space.
std::string normalize_label(std::string_view label);

/// Lowercased tokens split on whitespace and hyphens.
std::vector<std::string> tokenize_phrase(std::string_view phrase);

struct PhraseEmbedding {
  Vector vector;
  bool oov = false;  // no token of the phrase was in the vocabulary
};

/// Mean of the in-vocabulary token embeddings; zero vector with oov set otherwise.
PhraseEmbedding embed_phrase(std::string_view phrase, const EmbeddingTable& table);

}  // namespace t3s
