#include "t3s/embedding.hpp"

#include <cctype>

namespace t3s {

std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (char c : label) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

std::vector<std::string> tokenize_phrase(std::string_view phrase) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : phrase) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u) || c == '-') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

PhraseEmbedding embed_phrase(std::string_view phrase, const EmbeddingTable& table) {
  PhraseEmbedding out{Vector::Zero(table.word_dim()), true};
  int hits = 0;
  for (const std::string& tok : tokenize_phrase(phrase)) {
    if (const Vector* v = table.find(tok)) {
      out.vector += *v;
      ++hits;
    }
  }
  if (hits > 0) {
    out.vector /= static_cast<double>(hits);
    out.oov = false;
  }
  return out;
}

}  // namespace t3s
