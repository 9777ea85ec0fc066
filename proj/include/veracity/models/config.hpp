#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "veracity/corpus.hpp"
#include "veracity/rng.hpp"

namespace veracity::models {

enum class ModelKind {
  linreg,
  logreg_ovr,
  ordinal_logreg,
  seq,
  seq_just,
  enhanced,
  siamese_shared,
};

inline const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::linreg: return "linreg";
    case ModelKind::logreg_ovr: return "logreg-ovr";
    case ModelKind::ordinal_logreg: return "ordinal-logreg";
    case ModelKind::seq: return "seq";
    case ModelKind::seq_just: return "seq-just";
    case ModelKind::enhanced: return "enhanced";
    case ModelKind::siamese_shared: return "siamese-shared";
  }
  return "?";
}

inline ModelKind parse_kind(const std::string& s) {
  if (s == "linreg") return ModelKind::linreg;
  if (s == "logreg-ovr") return ModelKind::logreg_ovr;
  if (s == "ordinal-logreg") return ModelKind::ordinal_logreg;
  if (s == "seq") return ModelKind::seq;
  if (s == "seq-just") return ModelKind::seq_just;
  if (s == "enhanced") return ModelKind::enhanced;
  if (s == "siamese-shared") return ModelKind::siamese_shared;
  throw std::invalid_argument("unknown model kind: " + s);
}

inline bool is_regression(ModelKind k) {
  return k == ModelKind::linreg || k == ModelKind::logreg_ovr ||
         k == ModelKind::ordinal_logreg;
}

inline bool has_j_branch(ModelKind k) {
  return k == ModelKind::seq_just || k == ModelKind::enhanced ||
         k == ModelKind::siamese_shared;
}

inline bool has_c_branch(ModelKind k) { return k == ModelKind::enhanced; }

inline const char* label_space_name(corpus::LabelSpace s) {
  return s == corpus::LabelSpace::binary ? "binary" : "six";
}

inline corpus::LabelSpace parse_label_space(const std::string& s) {
  if (s == "binary") return corpus::LabelSpace::binary;
  if (s == "six") return corpus::LabelSpace::six;
  throw std::invalid_argument("unknown label space: " + s);
}

// Declarative model description. Defaults follow the branch-network layout:
// 32-unit S and J dense layers, 64-unit M, 1-unit C, 128-cell LSTM encoders,
// 0.15 statement dropout and 0.2 / 0.21 justification dropout.
struct ModelConfig {
  ModelKind kind = ModelKind::seq;
  corpus::LabelSpace label_space = corpus::LabelSpace::binary;
  std::size_t s_dense = 32;
  std::size_t m_dense = 64;
  std::size_t j_dense = 32;
  std::size_t c_dense = 1;
  std::size_t lstm_hidden = 128;
  double s_dropout = 0.15;
  double j_dropout = 0.2;
  std::size_t max_len_s = 0;  // 0 = derive from the training corpus
  std::size_t max_len_j = 0;
  bool shared_encoder = false;
  std::size_t embedding_dim = 100;
  std::size_t meta_width = 16;
  bool trainable_embeddings = false;

  int output_width() const {
    return label_space == corpus::LabelSpace::binary ? 1 : corpus::kNumLabelsSix;
  }

  std::size_t fused_width() const {
    return s_dense + m_dense + (has_j_branch(kind) ? j_dense : 0);
  }

  void validate() const {
    if (is_regression(kind)) return;
    if (s_dense == 0 || m_dense == 0 || lstm_hidden == 0 || embedding_dim == 0 ||
        meta_width == 0)
      throw std::invalid_argument("model config: zero-sized layer");
    if (has_j_branch(kind) && j_dense == 0)
      throw std::invalid_argument("model config: zero-sized justification branch");
    if (has_c_branch(kind) && c_dense != 1)
      throw std::invalid_argument("model config: credit branch must be 1 unit wide");
    if (s_dropout < 0 || s_dropout >= 1 || j_dropout < 0 || j_dropout >= 1)
      throw std::invalid_argument("model config: dropout rate outside [0, 1)");
    if (shared_encoder && !has_j_branch(kind))
      throw std::invalid_argument("model config: shared encoder needs a J branch");
  }
};

// Kind-specific defaults. The justification dropout is 0.21 for the enhanced
// model and 0.2 otherwise; the siamese variant shares the S/J encoder.
inline ModelConfig default_config(ModelKind kind, corpus::LabelSpace space) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.label_space = space;
  cfg.j_dropout = kind == ModelKind::enhanced ? 0.21 : 0.2;
  cfg.shared_encoder = kind == ModelKind::siamese_shared;
  return cfg;
}

inline nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"kind", kind_name(c.kind)},
      {"label_space", label_space_name(c.label_space)},
      {"s_dense", c.s_dense},
      {"m_dense", c.m_dense},
      {"j_dense", c.j_dense},
      {"c_dense", c.c_dense},
      {"lstm_hidden", c.lstm_hidden},
      {"s_dropout", c.s_dropout},
      {"j_dropout", c.j_dropout},
      {"max_len_s", c.max_len_s},
      {"max_len_j", c.max_len_j},
      {"shared_encoder", c.shared_encoder},
      {"embedding_dim", c.embedding_dim},
      {"meta_width", c.meta_width},
      {"trainable_embeddings", c.trainable_embeddings},
  };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  c.label_space = parse_label_space(j.at("label_space").get<std::string>());
  c.s_dense = j.value("s_dense", c.s_dense);
  c.m_dense = j.value("m_dense", c.m_dense);
  c.j_dense = j.value("j_dense", c.j_dense);
  c.c_dense = j.value("c_dense", c.c_dense);
  c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
  c.s_dropout = j.value("s_dropout", c.s_dropout);
  c.j_dropout = j.value("j_dropout", c.j_dropout);
  c.max_len_s = j.value("max_len_s", c.max_len_s);
  c.max_len_j = j.value("max_len_j", c.max_len_j);
  c.shared_encoder = j.value("shared_encoder", c.shared_encoder);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.meta_width = j.value("meta_width", c.meta_width);
  c.trainable_embeddings = j.value("trainable_embeddings", c.trainable_embeddings);
  return c;
}

// Stable identity of a configuration; recorded in checkpoints and reports.
inline std::string config_hash(const ModelConfig& c) {
  const std::uint64_t h = fnv1a64(to_json(c).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace veracity::models
