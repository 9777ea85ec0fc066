#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "veracity/corpus.hpp"
#include "veracity/engine/adam.hpp"
#include "veracity/engine/early_stopping.hpp"
#include "veracity/engine/loss.hpp"
#include "veracity/harness/reports.hpp"
#include "veracity/models/network.hpp"
#include "veracity/text.hpp"

namespace veracity::harness {

struct TrainConfig {
  int epochs = 120;
  int batch_size = 512;
  double lr = 1e-3;
  int patience = 15;
  std::uint64_t seed = 0;
  int threads = 1;
  double threshold = 0.5;  // binary decision threshold on P(fake)
};

// Epoch and batch defaults per model family; learning rate and patience are
// shared across them.
inline TrainConfig default_train_config(models::ModelKind kind,
                                        corpus::LabelSpace space) {
  TrainConfig t;
  if (kind == models::ModelKind::enhanced) {
    t.epochs = 500;
    t.batch_size = 256;
  } else {
    t.epochs = space == corpus::LabelSpace::binary ? 120 : 40;
    t.batch_size = 512;
  }
  return t;
}

// Imputation statistics, metadata vocabularies and per-branch sequence
// lengths, all derived from the training partition only.
struct Pipeline {
  models::ModelConfig cfg;
  corpus::TrainingStats stats;
  models::MetadataEncoder meta;
};

inline Pipeline build_pipeline(models::ModelConfig cfg,
                               const std::vector<corpus::Record>& train_records,
                               const text::EmbeddingTable& table) {
  Pipeline p;
  p.stats = corpus::training_stats(train_records);
  auto train = corpus::impute_missing(train_records, p.stats);
  p.meta = models::MetadataEncoder::build(train);
  if (cfg.max_len_s == 0) {
    std::vector<std::size_t> lengths;
    lengths.reserve(train.size());
    for (const auto& r : train)
      lengths.push_back(text::in_vocab_length(text::tokenize(r.statement), table));
    cfg.max_len_s = text::average_length(lengths);
  }
  if (models::has_j_branch(cfg.kind) && cfg.max_len_j == 0) {
    std::vector<std::size_t> lengths;
    lengths.reserve(train.size());
    for (const auto& r : train) {
      if (!r.justification)
        throw std::invalid_argument("record " + r.id +
                                    " lacks a justification required by model '" +
                                    models::kind_name(cfg.kind) + "'");
      lengths.push_back(text::in_vocab_length(text::tokenize(*r.justification), table));
    }
    cfg.max_len_j = text::average_length(lengths);
  }
  p.cfg = cfg;
  return p;
}

// Records must already be imputed against the pipeline's training stats.
inline std::vector<models::ModelInput> encode_records(
    const std::vector<corpus::Record>& records, const text::EmbeddingTable& table,
    const Pipeline& p) {
  std::vector<models::ModelInput> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    models::ModelInput in;
    in.stmt = text::encode(text::tokenize(r.statement), table, p.cfg.max_len_s);
    if (models::has_j_branch(p.cfg.kind)) {
      if (!r.justification)
        throw std::invalid_argument("record " + r.id +
                                    " lacks a justification required by model '" +
                                    models::kind_name(p.cfg.kind) + "'");
      in.just = text::encode(text::tokenize(*r.justification), table, p.cfg.max_len_j);
    }
    in.meta = p.meta.encode(r);
    in.counts = r.credit_counts();
    in.target = corpus::class_of(r, p.cfg.label_space);
    out.push_back(std::move(in));
  }
  return out;
}

namespace detail {

// Contiguous chunking; chunk boundaries depend only on (n, threads) so a
// fixed thread count reproduces the same reduction order.
inline std::vector<std::pair<std::size_t, std::size_t>> chunks(std::size_t n,
                                                               int threads) {
  const std::size_t t = std::max(1, threads);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t base = n / t, rem = n % t;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < t && begin < n; ++i) {
    const std::size_t len = base + (i < rem ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

template <typename Fn>
inline void run_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& parts,
                       Fn&& fn) {
  if (parts.size() <= 1) {
    for (std::size_t i = 0; i < parts.size(); ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    workers.emplace_back([&fn, i] { fn(i); });
  for (auto& w : workers) w.join();
}

}  // namespace detail

struct EvalResult {
  ConfusionMatrix cm;
  double mean_loss = 0;
};

inline engine::LossKind loss_kind(const models::ModelConfig& cfg) {
  return cfg.label_space == corpus::LabelSpace::binary
             ? engine::LossKind::binary
             : engine::LossKind::categorical;
}

inline EvalResult evaluate_model(const models::BranchNet& net,
                                 const std::vector<models::ModelInput>& examples,
                                 double threshold = 0.5, int threads = 1) {
  const int classes = corpus::num_classes(net.config().label_space);
  EvalResult res{ConfusionMatrix(classes), 0.0};
  if (examples.empty()) return res;
  const auto parts = detail::chunks(examples.size(), threads);
  std::vector<ConfusionMatrix> cms(parts.size(), ConfusionMatrix(classes));
  std::vector<double> losses(parts.size(), 0.0);
  const auto kind = loss_kind(net.config());
  detail::run_chunks(parts, [&](std::size_t ci) {
    for (std::size_t i = parts[ci].first; i < parts[ci].second; ++i) {
      const auto& ex = examples[i];
      const auto probs = net.forward(ex, engine::Mode::eval, nullptr, nullptr);
      losses[ci] += engine::cross_entropy(probs.data(), probs.size(), ex.target, kind);
      cms[ci].add(ex.target, net.predict_class(probs, threshold));
    }
  });
  double total_loss = 0;
  for (std::size_t ci = 0; ci < parts.size(); ++ci) {
    total_loss += losses[ci];
    for (int t = 0; t < classes; ++t)
      for (int pdx = 0; pdx < classes; ++pdx)
        if (cms[ci].at(t, pdx)) res.cm.add(t, pdx, cms[ci].at(t, pdx));
  }
  res.mean_loss = total_loss / static_cast<double>(examples.size());
  return res;
}

struct TrainResult {
  MetricsReport report;
  models::BranchNet model;
  Pipeline pipeline;
};

// Train on the training split with per-epoch validation-loss early stopping,
// restore the best epoch's weights, then report test and training metrics.
// Fully determined by the seed for a fixed thread count; single-threaded runs
// are bit-reproducible.
inline TrainResult train_eval(const models::ModelConfig& cfg0,
                              const std::vector<corpus::Record>& train_records,
                              const std::vector<corpus::Record>& valid_records,
                              const std::vector<corpus::Record>& test_records,
                              const text::EmbeddingTable& table,
                              const TrainConfig& tcfg,
                              const std::string& split_ref = "") {
  if (train_records.empty()) throw std::invalid_argument("empty training split");
  Pipeline pipe = build_pipeline(cfg0, train_records, table);
  const auto train =
      encode_records(corpus::impute_missing(train_records, pipe.stats), table, pipe);
  const auto valid =
      encode_records(corpus::impute_missing(valid_records, pipe.stats), table, pipe);
  const auto test =
      encode_records(corpus::impute_missing(test_records, pipe.stats), table, pipe);

  models::BranchNet net(pipe.cfg, &table, pipe.meta,
                        derive_seed(tcfg.seed, "model-init"));
  engine::AdamConfig acfg;
  acfg.lr = tcfg.lr;
  engine::AdamOptimizer opt(net.params(), acfg);
  engine::EarlyStopping stopper(tcfg.patience);
  const auto kind = loss_kind(pipe.cfg);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(tcfg.seed, "batch-shuffle"));

  std::vector<double> train_hist, valid_hist;
  std::vector<engine::Tensor> best_values = net.params().snapshot_values();
  int best_epoch = 0;
  int epochs_run = 0;

  const int threads = std::max(1, tcfg.threads);
  std::vector<models::GradAccum> accums;
  for (int t = 0; t < threads; ++t) accums.push_back(net.make_grad_accum());

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    epochs_run = epoch;
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      const std::size_t bsz = stop - start;
      const auto parts = detail::chunks(bsz, threads);
      std::vector<double> losses(parts.size(), 0.0);
      for (auto& acc : accums)
        for (auto& t : acc) t.fill(0.0);
      detail::run_chunks(parts, [&](std::size_t ci) {
        models::ForwardCache cache;
        std::vector<double> dprobs;
        for (std::size_t bi = parts[ci].first; bi < parts[ci].second; ++bi) {
          const std::size_t pos = start + bi;
          const auto& ex = train[order[pos]];
          Rng drop_rng(derive_seed(tcfg.seed, "dropout",
                                   static_cast<std::uint64_t>(epoch) << 32 | pos));
          const auto probs = net.forward(ex, engine::Mode::train, &drop_rng, &cache);
          losses[ci] +=
              engine::cross_entropy(probs.data(), probs.size(), ex.target, kind);
          dprobs.resize(probs.size());
          engine::cross_entropy_grad(probs.data(), probs.size(), ex.target, kind,
                                     dprobs.data());
          net.backward(ex, cache, dprobs, accums[ci]);
        }
      });
      auto& params = net.params();
      params.zero_grads();
      const double scale = 1.0 / static_cast<double>(bsz);
      for (std::size_t ci = 0; ci < parts.size(); ++ci) {
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
          const auto& src = accums[ci][pi].v;
          auto& dst = params[pi].grad.v;
          for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k] * scale;
        }
        epoch_loss += losses[ci];
      }
      opt.step(params);
    }
    train_hist.push_back(epoch_loss / static_cast<double>(train.size()));

    if (!valid.empty()) {
      const auto val = evaluate_model(net, valid, tcfg.threshold, threads);
      valid_hist.push_back(val.mean_loss);
      const bool stop = stopper.update(val.mean_loss);
      if (stopper.best_epoch() == epoch) {
        best_values = net.params().snapshot_values();
        best_epoch = epoch;
      }
      if (stop) break;
    } else {
      best_values = net.params().snapshot_values();
      best_epoch = epoch;
    }
  }
  net.params().restore_values(best_values);
  if (best_epoch == 0) best_epoch = epochs_run;

  MetricsReport report;
  report.model = models::kind_name(pipe.cfg.kind);
  report.label_space = models::label_space_name(pipe.cfg.label_space);
  if (!test.empty())
    report.test = metrics(evaluate_model(net, test, tcfg.threshold, threads).cm);
  report.train = metrics(evaluate_model(net, train, tcfg.threshold, threads).cm);
  report.train_loss = std::move(train_hist);
  report.valid_loss = std::move(valid_hist);
  report.best_epoch = best_epoch;
  report.epochs_run = epochs_run;
  report.config_hash = models::config_hash(pipe.cfg);
  report.seed = tcfg.seed;
  report.split_manifest = split_ref;
  report.max_len_s = pipe.cfg.max_len_s;
  report.max_len_j = pipe.cfg.max_len_j;
  report.threshold = tcfg.threshold;
  return TrainResult{std::move(report), std::move(net), std::move(pipe)};
}

}  // namespace veracity::harness
