#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracity/credit.hpp"
#include "veracity/engine/layers.hpp"
#include "veracity/engine/tensor.hpp"
#include "veracity/models/config.hpp"
#include "veracity/models/metadata.hpp"
#include "veracity/text.hpp"

namespace veracity::models {

// One example, already encoded against a model's embedding table, metadata
// vocabularies and per-branch sequence lengths.
struct ModelInput {
  text::EncodedSequence stmt;
  text::EncodedSequence just;
  MetaEncoded meta;
  corpus::CreditCounts counts;
  int target = 0;
};

struct ForwardCache {
  engine::LstmCache s_lstm;
  std::vector<double> s_h, s_mask, s_dropped, s_out;
  std::vector<double> m_features, m_out;
  engine::LstmCache j_lstm;
  std::vector<double> j_h, j_mask, j_dropped, j_out;
  double ratio = 0, cs = 0;
  std::vector<double> fused;
  std::vector<double> probs;
};

// Gradient accumulator aligned with a ParamSet's registration order.
using GradAccum = std::vector<engine::Tensor>;

// The branch network family: statement encoder (S), metadata (M), optional
// justification encoder (J) and optional credit-score scalar (C), fused by
// concatenation plus a broadcast add of C, with a sigmoid or softmax head.
// With a shared encoder the J branch reuses the S-branch LSTM parameters.
class BranchNet {
 public:
  BranchNet(ModelConfig cfg, const text::EmbeddingTable* table,
            MetadataEncoder meta, std::uint64_t init_seed)
      : cfg_(std::move(cfg)), table_(table), meta_(std::move(meta)) {
    cfg_.validate();
    if (is_regression(cfg_.kind))
      throw std::invalid_argument("branch network cannot be built for a regression kind");
    if (table_->dim() != cfg_.embedding_dim)
      throw std::invalid_argument(
          "embedding table dimension " + std::to_string(table_->dim()) +
          " does not match configured dimension " +
          std::to_string(cfg_.embedding_dim));
    const std::size_t d = cfg_.embedding_dim, h = cfg_.lstm_hidden;
    if (cfg_.trainable_embeddings) {
      embed_i_ = add_param("embed", {table_->rows(), d});
      P(embed_i_).value.v = table_->matrix();
    }
    s_wx_i_ = add_param("s.enc.lstm.wx", {d, 4 * h});
    s_wh_i_ = add_param("s.enc.lstm.wh", {h, 4 * h});
    s_b_i_ = add_param("s.enc.lstm.b", {4 * h});
    if (has_j_branch(cfg_.kind) && !cfg_.shared_encoder) {
      j_wx_i_ = add_param("j.enc.lstm.wx", {d, 4 * h});
      j_wh_i_ = add_param("j.enc.lstm.wh", {h, 4 * h});
      j_b_i_ = add_param("j.enc.lstm.b", {4 * h});
    } else {
      j_wx_i_ = s_wx_i_;
      j_wh_i_ = s_wh_i_;
      j_b_i_ = s_b_i_;
    }
    s_dw_i_ = add_param("s.dense.w", {h, cfg_.s_dense});
    s_db_i_ = add_param("s.dense.b", {cfg_.s_dense});
    for (int f = 0; f < kNumMetaFields; ++f)
      m_embed_i_[f] = add_param(std::string("m.embed.") + kMetaFieldNames[f],
                                {meta_.embedding_rows(f), cfg_.meta_width});
    m_dw_i_ = add_param("m.dense.w", {feature_width(), cfg_.m_dense});
    m_db_i_ = add_param("m.dense.b", {cfg_.m_dense});
    if (has_j_branch(cfg_.kind)) {
      j_dw_i_ = add_param("j.dense.w", {h, cfg_.j_dense});
      j_db_i_ = add_param("j.dense.b", {cfg_.j_dense});
    }
    if (has_c_branch(cfg_.kind)) {
      c_w_i_ = add_param("c.w", {1});
      c_b_i_ = add_param("c.b", {1});
    }
    head_w_i_ = add_param("head.w", {cfg_.fused_width(),
                                     static_cast<std::size_t>(cfg_.output_width())});
    head_b_i_ = add_param("head.b", {static_cast<std::size_t>(cfg_.output_width())});
    init_params(init_seed);
  }

  BranchNet(const BranchNet&) = delete;
  BranchNet& operator=(const BranchNet&) = delete;
  BranchNet(BranchNet&&) = default;
  BranchNet& operator=(BranchNet&&) = default;

  const ModelConfig& config() const { return cfg_; }
  const MetadataEncoder& metadata_encoder() const { return meta_; }
  const text::EmbeddingTable& table() const { return *table_; }
  engine::ParamSet& params() { return params_; }
  const engine::ParamSet& params() const { return params_; }

  std::size_t feature_width() const {
    return kNumMetaFields * cfg_.meta_width + corpus::kNumCountFields;
  }

  int output_width() const { return cfg_.output_width(); }

  GradAccum make_grad_accum() const {
    GradAccum g;
    g.reserve(params_.size());
    for (const auto& p : params_) g.emplace_back(p.value.shape);
    return g;
  }

  // probs has length 1 (P(fake), binary) or 6 (softmax distribution).
  std::vector<double> forward(const ModelInput& in, engine::Mode mode,
                              Rng* dropout_rng, ForwardCache* cache) const {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    const std::size_t h = cfg_.lstm_hidden;

    encoder_forward(in.stmt, s_wx_i_, s_wh_i_, s_b_i_, c.s_lstm, c.s_h);
    c.s_dropped.resize(h);
    c.s_mask.resize(h);
    dropout_apply(c.s_h, cfg_.s_dropout, mode, dropout_rng, c.s_dropped, c.s_mask);
    c.s_out.resize(cfg_.s_dense);
    engine::dense_forward_row(c.s_dropped.data(), h, P(s_dw_i_).value.data(),
                              P(s_db_i_).value.data(), cfg_.s_dense,
                              engine::Activation::relu, c.s_out.data());

    meta_features(in.meta, c.m_features);
    c.m_out.resize(cfg_.m_dense);
    engine::dense_forward_row(c.m_features.data(), feature_width(),
                              P(m_dw_i_).value.data(), P(m_db_i_).value.data(),
                              cfg_.m_dense, engine::Activation::relu,
                              c.m_out.data());

    if (has_j_branch(cfg_.kind)) {
      encoder_forward(in.just, j_wx_i_, j_wh_i_, j_b_i_, c.j_lstm, c.j_h);
      c.j_dropped.resize(h);
      c.j_mask.resize(h);
      dropout_apply(c.j_h, cfg_.j_dropout, mode, dropout_rng, c.j_dropped, c.j_mask);
      c.j_out.resize(cfg_.j_dense);
      engine::dense_forward_row(c.j_dropped.data(), h, P(j_dw_i_).value.data(),
                                P(j_db_i_).value.data(), cfg_.j_dense,
                                engine::Activation::relu, c.j_out.data());
    }

    const std::size_t fw = cfg_.fused_width();
    c.fused.resize(fw);
    std::size_t off = 0;
    std::copy(c.s_out.begin(), c.s_out.end(), c.fused.begin());
    off += cfg_.s_dense;
    std::copy(c.m_out.begin(), c.m_out.end(), c.fused.begin() + off);
    off += cfg_.m_dense;
    if (has_j_branch(cfg_.kind))
      std::copy(c.j_out.begin(), c.j_out.end(), c.fused.begin() + off);

    if (has_c_branch(cfg_.kind)) {
      c.ratio = credit::history_ratio(in.counts);
      c.cs = std::tanh(P(c_w_i_).value.v[0] * c.ratio + P(c_b_i_).value.v[0]);
      for (auto& e : c.fused) e += c.cs;
    }

    const auto out = static_cast<std::size_t>(output_width());
    c.probs.resize(out);
    engine::dense_forward_row(c.fused.data(), fw, P(head_w_i_).value.data(),
                              P(head_b_i_).value.data(), out, head_activation(),
                              c.probs.data());
    return c.probs;
  }

  // Accumulate gradients of a scalar loss into `grads` given the gradient of
  // that loss w.r.t. the output probabilities.
  void backward(const ModelInput& in, const ForwardCache& c,
                const std::vector<double>& dprobs, GradAccum& grads) const {
    if (c.probs.empty())
      throw std::logic_error("backward requested before forward");
    const std::size_t h = cfg_.lstm_hidden;
    const std::size_t fw = cfg_.fused_width();
    const auto out = static_cast<std::size_t>(output_width());

    std::vector<double> dz(out);
    engine::activation_backward(head_activation(), c.probs.data(), dprobs.data(),
                                out, dz.data());
    std::vector<double> dfused(fw);
    engine::dense_backward_row(c.fused.data(), fw, P(head_w_i_).value.data(), out,
                               dz.data(), grads[head_w_i_].data(),
                               grads[head_b_i_].data(), dfused.data());

    if (has_c_branch(cfg_.kind)) {
      double dcs = 0;
      for (double g : dfused) dcs += g;
      const double dpre = dcs * (1.0 - c.cs * c.cs);
      grads[c_w_i_].v[0] += dpre * c.ratio;
      grads[c_b_i_].v[0] += dpre;
    }

    // S branch
    {
      std::vector<double> dz_s(cfg_.s_dense);
      engine::activation_backward(engine::Activation::relu, c.s_out.data(),
                                  dfused.data(), cfg_.s_dense, dz_s.data());
      std::vector<double> ddropped(h);
      engine::dense_backward_row(c.s_dropped.data(), h, P(s_dw_i_).value.data(),
                                 cfg_.s_dense, dz_s.data(), grads[s_dw_i_].data(),
                                 grads[s_db_i_].data(), ddropped.data());
      std::vector<double> dh(h);
      engine::dropout_backward(ddropped.data(), c.s_mask.data(), h, dh.data());
      encoder_backward(in.stmt, c.s_lstm, s_wx_i_, s_wh_i_, s_b_i_, dh, grads);
    }

    // M branch
    {
      std::vector<double> dz_m(cfg_.m_dense);
      engine::activation_backward(engine::Activation::relu, c.m_out.data(),
                                  dfused.data() + cfg_.s_dense, cfg_.m_dense,
                                  dz_m.data());
      std::vector<double> dfeat(feature_width());
      engine::dense_backward_row(c.m_features.data(), feature_width(),
                                 P(m_dw_i_).value.data(), cfg_.m_dense,
                                 dz_m.data(), grads[m_dw_i_].data(),
                                 grads[m_db_i_].data(), dfeat.data());
      for (int f = 0; f < kNumMetaFields; ++f) {
        const auto& rows = in.meta.rows[f];
        const double inv = 1.0 / static_cast<double>(rows.size());
        const double* dslice = dfeat.data() + static_cast<std::size_t>(f) * cfg_.meta_width;
        for (auto row : rows) {
          double* dst = grads[m_embed_i_[f]].data() + row * cfg_.meta_width;
          for (std::size_t k = 0; k < cfg_.meta_width; ++k)
            dst[k] += inv * dslice[k];
        }
      }
    }

    // J branch
    if (has_j_branch(cfg_.kind)) {
      std::vector<double> dz_j(cfg_.j_dense);
      engine::activation_backward(engine::Activation::relu, c.j_out.data(),
                                  dfused.data() + cfg_.s_dense + cfg_.m_dense,
                                  cfg_.j_dense, dz_j.data());
      std::vector<double> ddropped(h);
      engine::dense_backward_row(c.j_dropped.data(), h, P(j_dw_i_).value.data(),
                                 cfg_.j_dense, dz_j.data(), grads[j_dw_i_].data(),
                                 grads[j_db_i_].data(), ddropped.data());
      std::vector<double> dh(h);
      engine::dropout_backward(ddropped.data(), c.j_mask.data(), h, dh.data());
      encoder_backward(in.just, c.j_lstm, j_wx_i_, j_wh_i_, j_b_i_, dh, grads);
    }
  }

  int predict_class(const std::vector<double>& probs, double threshold = 0.5) const {
    if (cfg_.label_space == corpus::LabelSpace::binary)
      return probs[0] >= threshold ? 0 : 1;  // fake is class 0
    int best = 0;
    for (int i = 1; i < static_cast<int>(probs.size()); ++i)
      if (probs[i] > probs[best]) best = i;
    return best;
  }

 private:
  std::size_t add_param(std::string name, std::vector<std::size_t> shape) {
    params_.add(std::move(name), std::move(shape));
    return params_.size() - 1;
  }

  engine::Param& P(std::size_t i) { return params_[i]; }
  const engine::Param& P(std::size_t i) const { return params_[i]; }

  engine::Activation head_activation() const {
    return cfg_.label_space == corpus::LabelSpace::binary
               ? engine::Activation::sigmoid
               : engine::Activation::softmax;
  }

  void init_params(std::uint64_t seed) {
    const std::size_t h = cfg_.lstm_hidden, d = cfg_.embedding_dim;
    for (auto& p : params_) {
      Rng rng(derive_seed(seed, "init:" + p.name));
      if (p.name == "embed") continue;  // copied from the pretrained table
      if (p.name.ends_with("lstm.wx")) {
        engine::glorot_init(p.value, d, 4 * h, rng);
      } else if (p.name.ends_with("lstm.wh")) {
        engine::glorot_init(p.value, h, 4 * h, rng);
      } else if (p.name.ends_with("lstm.b")) {
        p.value.fill(0.0);
        for (std::size_t j = h; j < 2 * h; ++j) p.value.v[j] = 1.0;  // forget gate
      } else if (p.name.starts_with("m.embed.")) {
        for (auto& e : p.value.v) e = rng.uniform(-0.05, 0.05);
      } else if (p.name == "c.w") {
        p.value.v[0] = 1.0;
      } else if (p.name == "c.b") {
        p.value.v[0] = 0.0;
      } else if (p.name.ends_with(".w")) {
        engine::glorot_init(p.value, p.value.rows(), p.value.cols(), rng);
      } else {
        p.value.fill(0.0);
      }
    }
  }

  const double* embedding_row(std::size_t index) const {
    if (cfg_.trainable_embeddings)
      return P(embed_i_).value.data() + index * cfg_.embedding_dim;
    return table_->row(index);
  }

  void encoder_forward(const text::EncodedSequence& seq, std::size_t wx_i,
                       std::size_t wh_i, std::size_t b_i,
                       engine::LstmCache& cache, std::vector<double>& h_out) const {
    std::vector<const double*> rows;
    rows.reserve(seq.true_length);
    for (std::size_t t = 0; t < seq.true_length; ++t)
      rows.push_back(embedding_row(seq.indices[t]));
    h_out.assign(cfg_.lstm_hidden, 0.0);
    engine::lstm_forward(rows, P(wx_i).value.data(), P(wh_i).value.data(),
                         P(b_i).value.data(),
                         {cfg_.embedding_dim, cfg_.lstm_hidden}, h_out.data(),
                         &cache);
  }

  void encoder_backward(const text::EncodedSequence& seq,
                        const engine::LstmCache& cache, std::size_t wx_i,
                        std::size_t wh_i, std::size_t b_i,
                        const std::vector<double>& dh, GradAccum& grads) const {
    std::vector<double> dx;
    double* dx_ptr = nullptr;
    if (cfg_.trainable_embeddings && cache.steps > 0) {
      dx.assign(cache.steps * cfg_.embedding_dim, 0.0);
      dx_ptr = dx.data();
    }
    engine::lstm_backward(cache, P(wx_i).value.data(), P(wh_i).value.data(),
                          {cfg_.embedding_dim, cfg_.lstm_hidden}, dh.data(),
                          grads[wx_i].data(), grads[wh_i].data(),
                          grads[b_i].data(), dx_ptr);
    if (dx_ptr) {
      for (std::size_t t = 0; t < cache.steps; ++t) {
        double* dst = grads[embed_i_].data() + seq.indices[t] * cfg_.embedding_dim;
        const double* src = dx.data() + t * cfg_.embedding_dim;
        for (std::size_t k = 0; k < cfg_.embedding_dim; ++k) dst[k] += src[k];
      }
    }
  }

  void dropout_apply(const std::vector<double>& x, double rate, engine::Mode mode,
                     Rng* rng, std::vector<double>& y,
                     std::vector<double>& mask) const {
    if (mode == engine::Mode::train && rate > 0.0 && !rng)
      throw std::invalid_argument("training forward pass needs a dropout rng");
    Rng dummy(0);
    engine::dropout_forward(x.data(), x.size(), rate, mode, rng ? *rng : dummy,
                            y.data(), mask.data());
  }

  void meta_features(const MetaEncoded& meta, std::vector<double>& features) const {
    const std::size_t w = cfg_.meta_width;
    features.assign(feature_width(), 0.0);
    for (int f = 0; f < kNumMetaFields; ++f) {
      const auto& rows = meta.rows[f];
      double* dst = features.data() + static_cast<std::size_t>(f) * w;
      const double inv = 1.0 / static_cast<double>(rows.size());
      for (auto row : rows) {
        const double* src = P(m_embed_i_[f]).value.data() + row * w;
        for (std::size_t k = 0; k < w; ++k) dst[k] += inv * src[k];
      }
    }
    for (int cidx = 0; cidx < corpus::kNumCountFields; ++cidx)
      features[kNumMetaFields * w + static_cast<std::size_t>(cidx)] = meta.counts[cidx];
  }

  ModelConfig cfg_;
  const text::EmbeddingTable* table_;
  MetadataEncoder meta_;
  engine::ParamSet params_;

  std::size_t embed_i_ = static_cast<std::size_t>(-1);
  std::size_t s_wx_i_ = 0, s_wh_i_ = 0, s_b_i_ = 0;
  std::size_t j_wx_i_ = 0, j_wh_i_ = 0, j_b_i_ = 0;
  std::size_t s_dw_i_ = 0, s_db_i_ = 0;
  std::size_t m_embed_i_[kNumMetaFields] = {};
  std::size_t m_dw_i_ = 0, m_db_i_ = 0;
  std::size_t j_dw_i_ = 0, j_db_i_ = 0;
  std::size_t c_w_i_ = 0, c_b_i_ = 0;
  std::size_t head_w_i_ = 0, head_b_i_ = 0;
};

// Closed-form trainable parameter count for a configuration and metadata
// vocabulary, independent of the network wiring.
inline std::size_t expected_param_count(const ModelConfig& cfg,
                                        const MetadataEncoder& meta,
                                        std::size_t table_rows) {
  const std::size_t d = cfg.embedding_dim, h = cfg.lstm_hidden;
  const std::size_t lstm = d * 4 * h + h * 4 * h + 4 * h;
  std::size_t n = lstm;                               // S encoder
  if (has_j_branch(cfg.kind) && !cfg.shared_encoder) n += lstm;
  if (cfg.trainable_embeddings) n += table_rows * d;
  n += h * cfg.s_dense + cfg.s_dense;
  std::size_t fweight = 0;
  for (int f = 0; f < kNumMetaFields; ++f)
    fweight += meta.embedding_rows(f) * cfg.meta_width;
  n += fweight;
  const std::size_t featw = kNumMetaFields * cfg.meta_width + corpus::kNumCountFields;
  n += featw * cfg.m_dense + cfg.m_dense;
  if (has_j_branch(cfg.kind)) n += h * cfg.j_dense + cfg.j_dense;
  if (has_c_branch(cfg.kind)) n += 2;
  n += cfg.fused_width() * static_cast<std::size_t>(cfg.output_width()) +
       static_cast<std::size_t>(cfg.output_width());
  return n;
}

}  // namespace veracity::models
