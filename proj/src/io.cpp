#include "t3s/io.hpp"

#include "t3s/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace t3s {

namespace {

std::string at(const std::string& where, const std::string& what) {
  return where.empty() ? what : where + ": " + what;
}

Json parse_json(std::string_view text, const char* what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at(where, std::string("missing field '") + key + "'"));
  return *it;
}

std::string get_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(at(where, std::string("field '") + key + "' must be a string"));
  return v.get<std::string>();
}

double get_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(at(where, "expected a number"));
  return v.get<double>();
}

Vector get_vector(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(at(where, "expected an array of numbers"));
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = get_number(v[i], where);
  return out;
}

Matrix get_matrix(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(at(where, "expected an array of rows"));
  if (v.empty()) return Matrix(0, 0);
  const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
  Matrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    Vector row = get_vector(v[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
    if (r == 0) out.resize(rows, row.size());
    if (row.size() != out.cols()) throw ParseError(at(where, "ragged matrix rows"));
    out.row(r) = row.transpose();
  }
  return out;
}

Json vector_json(const Eigen::Ref<const Vector>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Eigen::Ref<const Matrix>& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

std::string normalized_or_throw(const std::string& raw, const std::string& where) {
  std::string s = normalize_label(raw);
  if (s.empty()) throw ValidationError(at(where, "label is empty after normalization"));
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

bool EmbeddingTable::insert(const std::string& word, Vector v) {
  auto [it, inserted] = entries_.insert_or_assign(word, std::move(v));
  if (inserted) order_.push_back(word);
  return !inserted;
}

const Vector* EmbeddingTable::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

void MetricConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (!(lambda_bg > 0.0) || !std::isfinite(lambda_bg)) throw ValidationError("lambda_bg must be positive");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.01)) throw ValidationError("clamp_eps must lie in (0, 0.01)");
  if (alpha_fbd && !(*alpha_fbd >= 0.0)) throw ValidationError("alpha_fbd must be non-negative");
  if (beta_fbd && !(*beta_fbd >= 0.0)) throw ValidationError("beta_fbd must be non-negative");
  if (!std::isfinite(match_threshold)) throw ValidationError("match_threshold must be finite");
}

// ---------------------------------------------------------------------------
// Entity sets

void validate_entity_set(const EntitySet& es) {
  if (es.feature_dim <= 0) throw ValidationError("feature_dim must be a positive integer");
  if (es.global_feature.size() != es.feature_dim) {
    throw ValidationError("global_feature has length " + std::to_string(es.global_feature.size()) +
                          ", expected " + std::to_string(es.feature_dim));
  }
  if (!es.global_feature.allFinite()) throw ValidationError("global_feature has a non-finite component");
  if ((es.global_feature.array() == 0.0).all()) throw ValidationError("global_feature is the zero vector");
  if (es.entities.empty()) throw ValidationError("entities: at least one entity is required");

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < es.entities.size(); ++i) {
    const Entity& e = es.entities[i];
    const std::string where = "entities[" + std::to_string(i) + "] (id '" + e.id + "')";
    if (e.id.empty()) throw ValidationError(where + ": id is empty");
    if (e.feature.size() != es.feature_dim) {
      throw ValidationError(where + ": feature has length " + std::to_string(e.feature.size()) +
                            ", expected feature_dim " + std::to_string(es.feature_dim));
    }
    if (!e.feature.allFinite()) throw ValidationError(where + ": feature has a non-finite component");
    if (!std::isfinite(e.area) || !(e.area > 0.0)) throw ValidationError(where + ": area must be finite and > 0");
    if (e.fg_prob && !(*e.fg_prob >= 0.0 && *e.fg_prob <= 1.0)) {
      throw ValidationError(where + ": fg_prob must lie in [0, 1]");
    }
    if (!ids.insert(e.id).second) throw ValidationError(where + ": duplicate id");
  }
}

EntitySet parse_entity_set(std::string_view text) {
  const Json doc = parse_json(text, "entity set");
  if (!doc.is_object()) throw ParseError("entity set: document must be a JSON object");

  EntitySet es;
  es.image_id = get_string(doc, "image_id", "");
  const Json& dim = require(doc, "feature_dim", "");
  if (!dim.is_number_integer()) throw ParseError("field 'feature_dim' must be an integer");
  es.feature_dim = dim.get<Eigen::Index>();
  es.global_feature = get_vector(require(doc, "global_feature", ""), "global_feature");

  const Json& list = require(doc, "entities", "");
  if (!list.is_array()) throw ParseError("field 'entities' must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "entities[" + std::to_string(i) + "]";
    const Json& item = list[i];
    if (!item.is_object()) throw ParseError(where + ": must be an object");
    Entity e;
    e.id = get_string(item, "id", where);
    e.feature = get_vector(require(item, "feature", where), where + ".feature");
    e.area = get_number(require(item, "area", where), where + ".area");
    if (auto it = item.find("fg_prob"); it != item.end() && !it->is_null()) {
      e.fg_prob = get_number(*it, where + ".fg_prob");
    }
    es.entities.push_back(std::move(e));
  }
  validate_entity_set(es);
  return es;
}

std::string serialize_entity_set(const EntitySet& es) {
  Json doc;
  doc["image_id"] = es.image_id;
  doc["feature_dim"] = es.feature_dim;
  doc["global_feature"] = vector_json(es.global_feature);
  Json list = Json::array();
  for (const Entity& e : es.entities) {
    Json item;
    item["id"] = e.id;
    item["feature"] = vector_json(e.feature);
    item["area"] = e.area;
    if (e.fg_prob) item["fg_prob"] = *e.fg_prob;
    list.push_back(std::move(item));
  }
  doc["entities"] = std::move(list);
  return doc.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Annotations

SemanticAnnotation parse_annotation(std::string_view text) {
  const Json doc = parse_json(text, "annotation");
  if (!doc.is_object()) throw ParseError("annotation: document must be a JSON object");

  SemanticAnnotation ann;
  ann.image_id = get_string(doc, "image_id", "");
  const Json& classes = require(doc, "classes", "");
  if (!classes.is_array()) throw ParseError("field 'classes' must be an array");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "classes[" + std::to_string(i) + "]";
    if (!classes[i].is_string()) throw ParseError(where + ": must be a string");
    ann.classes.push_back(normalized_or_throw(classes[i].get<std::string>(), where));
  }
  const Json& relations = require(doc, "relations", "");
  if (!relations.is_array()) throw ParseError("field 'relations' must be an array");
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const std::string where = "relations[" + std::to_string(i) + "]";
    const Json& t = relations[i];
    if (!t.is_array() || t.size() != 3) throw ParseError(where + ": must be a [subject, predicate, object] triplet");
    for (const Json& part : t) {
      if (!part.is_string()) throw ParseError(where + ": triplet members must be strings");
    }
    ann.relations.push_back({normalized_or_throw(t[0].get<std::string>(), where + ".subject"),
                             normalized_or_throw(t[1].get<std::string>(), where + ".predicate"),
                             normalized_or_throw(t[2].get<std::string>(), where + ".object")});
  }
  return ann;
}

std::string serialize_annotation(const SemanticAnnotation& ann) {
  Json doc;
  doc["image_id"] = ann.image_id;
  doc["classes"] = ann.classes;
  Json rel = Json::array();
  for (const Relation& r : ann.relations) rel.push_back({r.subject, r.predicate, r.object});
  doc["relations"] = std::move(rel);
  return doc.dump() + "\n";
}

// ---------------------------------------------------------------------------
// word2vec text

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_num(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingLoad load_embedding_table(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!split_ws(line).empty()) lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty()) throw ParseError("embedding table: missing header line");

  const auto header = split_ws(lines.front());
  long long vocab = 0;
  long long dim = 0;
  if (header.size() != 2 || !parse_num(header[0], vocab) || !parse_num(header[1], dim) || vocab < 0 || dim <= 0) {
    throw ParseError("embedding table: header must be \"vocab_size dim\"");
  }
  if (static_cast<long long>(lines.size()) - 1 != vocab) {
    throw ParseError("embedding table: header declares " + std::to_string(vocab) + " rows, found " +
                     std::to_string(lines.size() - 1));
  }

  EmbeddingLoad out{EmbeddingTable(static_cast<Eigen::Index>(dim)), {}};
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_ws(lines[r]);
    const std::string where = "embedding table row " + std::to_string(r);
    if (static_cast<long long>(cells.size()) - 1 != dim) {
      throw ParseError(where + ": expected " + std::to_string(dim) + " components, found " +
                       std::to_string(cells.size() - 1));
    }
    Vector v(dim);
    for (long long c = 0; c < dim; ++c) {
      if (!parse_num(cells[static_cast<std::size_t>(c) + 1], v[c]) || !std::isfinite(v[c])) {
        throw ParseError(where + ": non-numeric component " + std::to_string(c + 1));
      }
    }
    const std::string word = normalize_label(cells[0]);
    if (out.table.insert(word, std::move(v))) {
      out.warnings.push_back(where + ": duplicate word '" + word + "', last occurrence wins");
    }
  }
  return out;
}

std::string serialize_embedding_table(const EmbeddingTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << table.size() << ' ' << table.word_dim() << '\n';
  for (const std::string& w : table.words()) {
    os << w;
    const Vector& v = *table.find(w);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// FBD weights

FbdWeights parse_fbd_weights(std::string_view text) {
  const Json doc = parse_json(text, "fbd weights");
  if (!doc.is_object()) throw ParseError("fbd weights: document must be a JSON object");

  auto get_int = [&](const char* key) {
    const Json& v = require(doc, key, "");
    if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
  };
  const long long in_dim = get_int("in_dim");
  const long long latent_dim = get_int("latent_dim");
  const long long layers = get_int("layers");
  if (layers != kFbdLayers) {
    throw ValidationError("layers must be " + std::to_string(kFbdLayers) + ", got " + std::to_string(layers));
  }

  FbdWeights w;
  w.W_e = get_matrix(require(doc, "W_e", ""), "W_e");
  w.b_e = get_vector(require(doc, "b_e", ""), "b_e");
  const Json& P = require(doc, "P", "");
  if (!P.is_array()) throw ParseError("field 'P' must be an array of matrices");
  for (std::size_t l = 0; l < P.size(); ++l) w.P.push_back(get_matrix(P[l], "P[" + std::to_string(l) + "]"));
  w.G_w = get_vector(require(doc, "G_w", ""), "G_w");
  w.G_b = get_number(require(doc, "G_b", ""), "G_b");
  w.alpha = get_number(require(doc, "alpha", ""), "alpha");
  w.beta = get_number(require(doc, "beta", ""), "beta");

  if (w.W_e.cols() != in_dim || w.W_e.rows() != latent_dim) {
    throw ValidationError("W_e must be latent_dim x in_dim (" + std::to_string(latent_dim) + " x " +
                          std::to_string(in_dim) + ")");
  }
  w.validate();
  return w;
}

std::string serialize_fbd_weights(const FbdWeights& w) {
  Json doc;
  doc["in_dim"] = w.in_dim();
  doc["latent_dim"] = w.latent_dim();
  doc["layers"] = static_cast<int>(w.P.size());
  doc["W_e"] = matrix_json(w.W_e);
  doc["b_e"] = vector_json(w.b_e);
  Json P = Json::array();
  for (const Matrix& m : w.P) P.push_back(matrix_json(m));
  doc["P"] = std::move(P);
  doc["G_w"] = vector_json(w.G_w);
  doc["G_b"] = w.G_b;
  doc["alpha"] = w.alpha;
  doc["beta"] = w.beta;
  return doc.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Config and reports

MetricConfig parse_metric_config(std::string_view text, MetricConfig cfg) {
  const Json doc = parse_json(text, "config");
  if (!doc.is_object()) throw ParseError("config: document must be a JSON object");
  static const std::set<std::string> known = {"tau",       "lambda_bg",      "clamp_eps",
                                              "alpha_fbd", "beta_fbd",       "match_threshold",
                                              "symmetric_mode", "disable_fbd", "disable_relation"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) throw ParseError("config: unknown key '" + it.key() + "'");
  }
  auto num = [&](const char* key, double& out) {
    if (auto it = doc.find(key); it != doc.end()) out = get_number(*it, key);
  };
  auto opt = [&](const char* key, std::optional<double>& out) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (it->is_null()) out.reset();
      else out = get_number(*it, key);
    }
  };
  auto flag = [&](const char* key, bool& out) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_boolean()) throw ParseError(std::string(key) + ": expected a boolean");
      out = it->get<bool>();
    }
  };
  num("tau", cfg.tau);
  num("lambda_bg", cfg.lambda_bg);
  num("clamp_eps", cfg.clamp_eps);
  opt("alpha_fbd", cfg.alpha_fbd);
  opt("beta_fbd", cfg.beta_fbd);
  num("match_threshold", cfg.match_threshold);
  flag("symmetric_mode", cfg.symmetric_mode);
  flag("disable_fbd", cfg.disable_fbd);
  flag("disable_relation", cfg.disable_relation);
  cfg.validate();
  return cfg;
}

Json metric_config_to_json(const MetricConfig& cfg) {
  Json j;
  j["tau"] = cfg.tau;
  j["lambda_bg"] = cfg.lambda_bg;
  j["clamp_eps"] = cfg.clamp_eps;
  j["alpha_fbd"] = cfg.alpha_fbd ? Json(*cfg.alpha_fbd) : Json(nullptr);
  j["beta_fbd"] = cfg.beta_fbd ? Json(*cfg.beta_fbd) : Json(nullptr);
  j["match_threshold"] = cfg.match_threshold;
  j["symmetric_mode"] = cfg.symmetric_mode;
  j["disable_fbd"] = cfg.disable_fbd;
  j["disable_relation"] = cfg.disable_relation;
  return j;
}

Json score_report_to_json(const ScoreReport& r) {
  Json j;
  j["t3s"] = r.t3s;
  j["eps_f"] = r.eps_f;
  j["eps_b"] = r.eps_b;
  j["w_fg"] = r.w_fg;
  j["w_bg"] = r.w_bg;
  j["eps_ent"] = r.eps_ent;
  j["alpha_cls"] = r.alpha_cls;
  j["eps_r"] = r.eps_r;
  j["alpha_rel"] = r.alpha_rel;
  j["eps_ent_tilde"] = r.eps_ent_tilde;
  j["eps_r_tilde"] = r.eps_r_tilde;
  j["matched_counts"] = {{"fg", r.matched_fg}, {"bg", r.matched_bg}};
  j["many_to_one"] = {{"fg", r.many_to_one_fg}, {"bg", r.many_to_one_bg}};
  j["fbd"] = {{"mean_p_ref", r.mean_p_ref}, {"mean_p_dist", r.mean_p_dist}};
  j["oov_labels"] = r.oov_labels;
  j["clamped"] = {{"ent", r.ent_clamped},
                  {"rel", r.rel_clamped},
                  {"alpha_rel", r.alpha_rel_clamped},
                  {"no_valid_fg_match", r.no_valid_fg_match},
                  {"no_valid_bg_match", r.no_valid_bg_match},
                  {"class_term_skipped", r.class_term_skipped}};
  return j;
}

std::string score_report_csv_header() {
  return "t3s,eps_f,eps_b,w_fg,w_bg,eps_ent,alpha_cls,eps_r,alpha_rel,eps_ent_tilde,eps_r_tilde,"
         "matched_fg,matched_bg,ent_clamped,rel_clamped,alpha_rel_clamped";
}

std::string score_report_csv_row(const ScoreReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.t3s << ',' << r.eps_f << ',' << r.eps_b << ',' << r.w_fg << ',' << r.w_bg << ',' << r.eps_ent << ','
     << r.alpha_cls << ',' << r.eps_r << ',' << r.alpha_rel << ',' << r.eps_ent_tilde << ',' << r.eps_r_tilde
     << ',' << r.matched_fg << ',' << r.matched_bg << ',' << int(r.ent_clamped) << ',' << int(r.rel_clamped)
     << ',' << int(r.alpha_rel_clamped);
  return os.str();
}

// ---------------------------------------------------------------------------
// Training labels

FgLabels parse_fg_labels(std::string_view text) {
  const Json doc = parse_json(text, "labels");
  if (!doc.is_object()) throw ParseError("labels: document must be a JSON object");
  FgLabels out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it->is_object()) throw ParseError("labels['" + it.key() + "']: must be an object");
    for (auto jt = it->begin(); jt != it->end(); ++jt) {
      if (!jt->is_number_integer() || (jt->get<int>() != 0 && jt->get<int>() != 1)) {
        throw ValidationError("labels['" + it.key() + "']['" + jt.key() + "']: must be 0 or 1");
      }
      out[it.key()][jt.key()] = jt->get<int>();
    }
  }
  return out;
}

std::vector<LabeledSet> load_labeled_sets(const std::filesystem::path& dir, const FgLabels& labels) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<LabeledSet> out;
  for (const auto& f : files) {
    EntitySet es;
    try {
      es = parse_entity_set(read_text_file(f));
    } catch (const std::exception& e) {
      throw ValidationError(f.string() + ": " + e.what());
    }
    auto it = labels.find(es.image_id);
    if (it == labels.end()) throw ValidationError(f.string() + ": no labels for image '" + es.image_id + "'");
    LabeledSet ls;
    for (const Entity& e : es.entities) {
      auto jt = it->second.find(e.id);
      if (jt == it->second.end()) {
        throw ValidationError(f.string() + ": no label for entity '" + e.id + "'");
      }
      ls.labels.push_back(jt->second);
    }
    ls.set = std::move(es);
    out.push_back(std::move(ls));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace t3s
