// Command-line front end for the claim-veracity pipeline: dataset
// preparation, model training, cross-validation, evaluation, prediction,
// report comparison and speaker credit scoring.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "veracity/veracity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace veracity;

namespace {

struct OutDir {
  fs::path dir;

  explicit OutDir(const std::string& path) : dir(path) {
    fs::create_directories(dir);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

void write_manifest(const OutDir& out, const std::string& command,
                    const json& data_paths, std::uint64_t seed,
                    const std::string& config_path,
                    const std::string& config_hash, const json& extra) {
  json m;
  m["command"] = command;
  m["artifact_version"] = kVersion;
  m["out"] = out.dir.string();
  m["seed"] = seed;
  m["data"] = data_paths;
  m["config_path"] = config_path;
  m["config_hash"] = config_hash;
  m["settings"] = extra;
  harness::write_json(out.file("run_manifest.json"), m);
}

corpus::Variant parse_variant(const std::string& s) {
  if (s == "liar") return corpus::Variant::liar;
  if (s == "liar-plus") return corpus::Variant::liar_plus;
  throw std::invalid_argument("unknown dataset variant: " + s);
}

json embedding_meta(const text::EmbeddingTable& table) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(table.content_hash()));
  return {{"dim", table.dim()}, {"vocab_size", table.vocab_size()},
          {"content_hash", buf}};
}

void check_embedding_meta(const json& meta, const text::EmbeddingTable& table) {
  const json current = embedding_meta(table);
  if (meta != current)
    throw std::runtime_error(
        "embedding file does not match the one used at training time "
        "(expected " + meta.dump() + ", got " + current.dump() + ")");
}

json ids_of(const std::vector<corpus::Record>& records,
            const std::vector<std::size_t>& idx) {
  json out = json::array();
  for (auto i : idx) out.push_back(records[i].id);
  return out;
}

json label_histogram(const std::vector<corpus::Record>& records) {
  json h = json::object();
  for (int c = 0; c < corpus::kNumLabelsSix; ++c) {
    const auto name = corpus::label_name(static_cast<corpus::LabelSix>(c));
    long long n = 0;
    for (const auto& r : records)
      if (r.label == static_cast<corpus::LabelSix>(c)) ++n;
    h[name] = n;
  }
  return h;
}

struct ModelFlagOverrides {
  CLI::Option* s_dense = nullptr;
  CLI::Option* m_dense = nullptr;
  CLI::Option* j_dense = nullptr;
  CLI::Option* lstm_hidden = nullptr;
  CLI::Option* s_dropout = nullptr;
  CLI::Option* j_dropout = nullptr;
  CLI::Option* max_len_s = nullptr;
  CLI::Option* max_len_j = nullptr;
  CLI::Option* shared_encoder = nullptr;
  CLI::Option* embedding_dim = nullptr;
  CLI::Option* meta_width = nullptr;
  std::size_t v_s_dense = 0, v_m_dense = 0, v_j_dense = 0, v_lstm_hidden = 0;
  double v_s_dropout = 0, v_j_dropout = 0;
  std::size_t v_max_len_s = 0, v_max_len_j = 0;
  bool v_shared_encoder = false;
  std::size_t v_embedding_dim = 0, v_meta_width = 0;

  void attach(CLI::App* cmd) {
    s_dense = cmd->add_option("--s-dense", v_s_dense, "S-branch dense width");
    m_dense = cmd->add_option("--m-dense", v_m_dense, "M-branch dense width");
    j_dense = cmd->add_option("--j-dense", v_j_dense, "J-branch dense width");
    lstm_hidden = cmd->add_option("--lstm-hidden", v_lstm_hidden, "LSTM cells");
    s_dropout = cmd->add_option("--s-dropout", v_s_dropout, "S-branch dropout rate");
    j_dropout = cmd->add_option("--j-dropout", v_j_dropout, "J-branch dropout rate");
    max_len_s = cmd->add_option("--max-len-s", v_max_len_s,
                                "statement sequence length (0 = corpus average)");
    max_len_j = cmd->add_option("--max-len-j", v_max_len_j,
                                "justification sequence length (0 = corpus average)");
    shared_encoder = cmd->add_flag("--shared-encoder", v_shared_encoder,
                                   "share the S/J LSTM encoder parameters");
    embedding_dim = cmd->add_option("--embedding-dim", v_embedding_dim,
                                    "pretrained embedding dimension");
    meta_width = cmd->add_option("--meta-width", v_meta_width,
                                 "metadata category embedding width");
  }

  // flags override --config, which overrides defaults
  void apply(models::ModelConfig& cfg) const {
    if (s_dense->count()) cfg.s_dense = v_s_dense;
    if (m_dense->count()) cfg.m_dense = v_m_dense;
    if (j_dense->count()) cfg.j_dense = v_j_dense;
    if (lstm_hidden->count()) cfg.lstm_hidden = v_lstm_hidden;
    if (s_dropout->count()) cfg.s_dropout = v_s_dropout;
    if (j_dropout->count()) cfg.j_dropout = v_j_dropout;
    if (max_len_s->count()) cfg.max_len_s = v_max_len_s;
    if (max_len_j->count()) cfg.max_len_j = v_max_len_j;
    if (shared_encoder->count()) cfg.shared_encoder = v_shared_encoder;
    if (embedding_dim->count()) cfg.embedding_dim = v_embedding_dim;
    if (meta_width->count()) cfg.meta_width = v_meta_width;
  }
};

models::ModelConfig resolve_config(const std::string& model,
                                   const std::string& labels,
                                   const std::string& config_path,
                                   const ModelFlagOverrides& flags) {
  auto cfg = models::default_config(models::parse_kind(model),
                                    models::parse_label_space(labels));
  if (!config_path.empty()) {
    json file_cfg = harness::read_json(config_path);
    file_cfg["kind"] = models::kind_name(cfg.kind);
    file_cfg["label_space"] = models::label_space_name(cfg.label_space);
    cfg = models::config_from_json(file_cfg);
  }
  flags.apply(cfg);
  cfg.validate();
  return cfg;
}

json train_settings_json(const harness::TrainConfig& t) {
  return {{"epochs", t.epochs},     {"batch_size", t.batch_size},
          {"lr", t.lr},             {"patience", t.patience},
          {"threads", t.threads},   {"threshold", t.threshold}};
}

void save_net_checkpoint(const std::string& path, const models::BranchNet& net,
                         const corpus::TrainingStats& stats,
                         const text::EmbeddingTable& table, std::uint64_t seed,
                         double threshold) {
  json meta;
  meta["model_family"] = "branch-net";
  meta["config"] = models::to_json(net.config());
  meta["config_hash"] = models::config_hash(net.config());
  meta["seed"] = seed;
  meta["threshold"] = threshold;
  meta["metadata_encoder"] = net.metadata_encoder().to_json();
  meta["count_means"] = stats.count_means;
  meta["embeddings"] = embedding_meta(table);
  engine::save_checkpoint(path, engine::checkpoint_from_params(net.params(), meta));
}

struct LoadedNet {
  models::ModelConfig cfg;
  corpus::TrainingStats stats;
  double threshold = 0.5;
  std::unique_ptr<models::BranchNet> net;
};

LoadedNet load_net_checkpoint(const engine::Checkpoint& ckpt,
                              const text::EmbeddingTable& table) {
  LoadedNet out;
  out.cfg = models::config_from_json(ckpt.meta.at("config"));
  check_embedding_meta(ckpt.meta.at("embeddings"), table);
  auto meta_enc = models::MetadataEncoder::from_json(ckpt.meta.at("metadata_encoder"));
  const auto means = ckpt.meta.at("count_means").get<std::vector<double>>();
  std::copy(means.begin(), means.end(), out.stats.count_means.begin());
  out.threshold = ckpt.meta.value("threshold", 0.5);
  out.net = std::make_unique<models::BranchNet>(out.cfg, &table,
                                                std::move(meta_enc), 0);
  engine::params_from_checkpoint(ckpt, out.net->params());
  return out;
}

void save_regression_checkpoint(const std::string& path,
                                const models::RegressionModel& model,
                                const models::RegressionFeatureSpec& spec,
                                const corpus::TrainingStats& stats,
                                const text::EmbeddingTable& table,
                                corpus::LabelSpace space, std::uint64_t seed) {
  json meta;
  meta["model_family"] = "regression";
  meta["kind"] = models::kind_name(model.kind);
  meta["label_space"] = models::label_space_name(space);
  meta["n_classes"] = model.n_classes;
  meta["dim"] = model.dim;
  meta["seed"] = seed;
  meta["feature_spec"] = {{"use_justification", spec.use_justification},
                          {"count_mean", spec.count_mean},
                          {"count_std", spec.count_std}};
  meta["count_means"] = stats.count_means;
  meta["embeddings"] = embedding_meta(table);
  engine::Checkpoint ckpt;
  ckpt.meta = meta;
  ckpt.tensors.emplace_back("w", engine::Tensor({model.w.size()}, model.w));
  ckpt.tensors.emplace_back("bias", engine::Tensor({model.bias.size()}, model.bias));
  if (!model.thresholds.empty())
    ckpt.tensors.emplace_back("thresholds", engine::Tensor({model.thresholds.size()},
                                                           model.thresholds));
  engine::save_checkpoint(path, ckpt);
}

struct LoadedRegression {
  models::RegressionModel model;
  models::RegressionFeatureSpec spec;
  corpus::TrainingStats stats;
  corpus::LabelSpace space = corpus::LabelSpace::binary;
};

LoadedRegression load_regression_checkpoint(const engine::Checkpoint& ckpt,
                                            const text::EmbeddingTable& table) {
  LoadedRegression out;
  check_embedding_meta(ckpt.meta.at("embeddings"), table);
  out.model.kind = models::parse_kind(ckpt.meta.at("kind"));
  out.space = models::parse_label_space(ckpt.meta.at("label_space"));
  out.model.n_classes = ckpt.meta.at("n_classes");
  out.model.dim = ckpt.meta.at("dim");
  out.model.w = ckpt.tensor("w").v;
  out.model.bias = ckpt.tensor("bias").v;
  for (const auto& [name, t] : ckpt.tensors)
    if (name == "thresholds") out.model.thresholds = t.v;
  const auto& fs_json = ckpt.meta.at("feature_spec");
  out.spec.use_justification = fs_json.at("use_justification");
  const auto mean = fs_json.at("count_mean").get<std::vector<double>>();
  const auto stdv = fs_json.at("count_std").get<std::vector<double>>();
  std::copy(mean.begin(), mean.end(), out.spec.count_mean.begin());
  std::copy(stdv.begin(), stdv.end(), out.spec.count_std.begin());
  const auto means = ckpt.meta.at("count_means").get<std::vector<double>>();
  std::copy(means.begin(), means.end(), out.stats.count_means.begin());
  return out;
}

// ---------------------------------------------------------------------------

int run_prepare(const std::string& data, const std::string& valid,
                const std::string& test, const std::string& variant_str,
                const std::string& out_path, double train_frac,
                double valid_frac, std::uint64_t seed) {
  const auto variant = parse_variant(variant_str);
  OutDir out(out_path);
  json summary;
  json split_manifest;
  split_manifest["seed"] = seed;
  if (!valid.empty() || !test.empty()) {
    if (valid.empty() || test.empty())
      throw std::invalid_argument("prepare needs either one data file or all of "
                                  "--data, --valid and --test");
    const auto train_recs = corpus::parse_liar(data, variant);
    const auto valid_recs = corpus::parse_liar(valid, variant);
    const auto test_recs = corpus::parse_liar(test, variant);
    corpus::write_liar(out.file("train.tsv"), train_recs, variant);
    corpus::write_liar(out.file("valid.tsv"), valid_recs, variant);
    corpus::write_liar(out.file("test.tsv"), test_recs, variant);
    json train_ids = json::array(), valid_ids = json::array(), test_ids = json::array();
    for (const auto& r : train_recs) train_ids.push_back(r.id);
    for (const auto& r : valid_recs) valid_ids.push_back(r.id);
    for (const auto& r : test_recs) test_ids.push_back(r.id);
    split_manifest["train"] = train_ids;
    split_manifest["validation"] = valid_ids;
    split_manifest["test"] = test_ids;
    summary["train"] = {{"records", train_recs.size()},
                        {"labels", label_histogram(train_recs)}};
    summary["validation"] = {{"records", valid_recs.size()},
                             {"labels", label_histogram(valid_recs)}};
    summary["test"] = {{"records", test_recs.size()},
                       {"labels", label_histogram(test_recs)}};
  } else {
    const auto records = corpus::parse_liar(data, variant);
    const auto split = corpus::make_split(records, train_frac, valid_frac, seed);
    corpus::write_liar(out.file("train.tsv"), corpus::take(records, split.train),
                       variant);
    corpus::write_liar(out.file("valid.tsv"),
                       corpus::take(records, split.validation), variant);
    corpus::write_liar(out.file("test.tsv"), corpus::take(records, split.test),
                       variant);
    split_manifest["train"] = ids_of(records, split.train);
    split_manifest["validation"] = ids_of(records, split.validation);
    split_manifest["test"] = ids_of(records, split.test);
    summary["records"] = records.size();
    summary["labels"] = label_histogram(records);
    summary["fractions"] = {{"train", train_frac}, {"validation", valid_frac}};
  }
  harness::write_json(out.file("split_manifest.json"), split_manifest);
  harness::write_json(out.file("summary.json"), summary);
  write_manifest(out, "prepare",
                 {{"data", data}, {"valid", valid}, {"test", test}}, seed, "", "",
                 {{"variant", variant_str},
                  {"train_frac", train_frac},
                  {"valid_frac", valid_frac}});
  std::cout << "prepared splits under " << out.dir.string() << "\n";
  return 0;
}

int run_train(const models::ModelConfig& cfg, const std::string& train_path,
              const std::string& valid_path, const std::string& test_path,
              const std::string& variant_str, const std::string& emb_path,
              const harness::TrainConfig& tcfg, const std::string& out_path,
              const std::string& config_path) {
  const auto variant = parse_variant(variant_str);
  OutDir out(out_path);
  const auto train_recs = corpus::parse_liar(train_path, variant);
  const auto valid_recs =
      valid_path.empty() ? std::vector<corpus::Record>{}
                         : corpus::parse_liar(valid_path, variant);
  const auto test_recs = test_path.empty()
                             ? std::vector<corpus::Record>{}
                             : corpus::parse_liar(test_path, variant);
  const auto table = text::load_embeddings(emb_path, cfg.embedding_dim);

  json report_json;
  if (models::is_regression(cfg.kind)) {
    auto fit_recs = train_recs;
    fit_recs.insert(fit_recs.end(), valid_recs.begin(), valid_recs.end());
    const bool use_just = variant == corpus::Variant::liar_plus;
    harness::FittedRegression fitted;
    auto report = harness::run_regression_split(
        cfg.kind, cfg.label_space, fit_recs, test_recs, table,
        models::RegressionHyper{}, use_just, &fitted);
    report.seed = tcfg.seed;
    report.split_manifest = train_path;
    report.config_hash = models::config_hash(cfg);
    save_regression_checkpoint(out.file("model.ckpt"), fitted.model, fitted.spec,
                               fitted.stats, table, cfg.label_space, tcfg.seed);
    report_json = harness::to_json(report);
  } else {
    auto result = harness::train_eval(cfg, train_recs, valid_recs, test_recs,
                                      table, tcfg, train_path);
    save_net_checkpoint(out.file("model.ckpt"), result.model,
                        result.pipeline.stats, table, tcfg.seed, tcfg.threshold);
    harness::write_loss_history(out.file("loss_train.tsv"), result.report.train_loss);
    harness::write_loss_history(out.file("loss_valid.tsv"), result.report.valid_loss);
    report_json = harness::to_json(result.report);
  }
  harness::write_json(out.file("report.json"), report_json);
  write_manifest(out, "train",
                 {{"train", train_path},
                  {"valid", valid_path},
                  {"test", test_path},
                  {"embeddings", emb_path},
                  {"variant", variant_str}},
                 tcfg.seed, config_path, models::config_hash(cfg),
                 {{"model", models::to_json(cfg)},
                  {"train", train_settings_json(tcfg)}});
  if (report_json.contains("test"))
    std::cout << "test accuracy: " << report_json["test"]["accuracy"] << "\n";
  std::cout << "report written to " << out.file("report.json") << "\n";
  return 0;
}

int run_cv(const models::ModelConfig& cfg, const std::vector<std::string>& data_paths,
           const std::string& variant_str, const std::string& emb_path, int k,
           const harness::TrainConfig& tcfg, const std::string& out_path,
           const std::string& config_path) {
  const auto variant = parse_variant(variant_str);
  OutDir out(out_path);
  std::vector<corpus::Record> pool;
  for (const auto& path : data_paths) {
    auto records = corpus::parse_liar(path, variant);
    pool.insert(pool.end(), records.begin(), records.end());
  }
  const auto table = text::load_embeddings(emb_path, cfg.embedding_dim);
  harness::CVConfig cvcfg;
  cvcfg.k = k;
  cvcfg.seed = tcfg.seed;
  const auto cv = harness::cross_validate(cfg, pool, table, tcfg, cvcfg);
  harness::write_json(out.file("cv_report.json"), harness::to_json(cv));
  write_manifest(out, "cv",
                 {{"data", data_paths}, {"embeddings", emb_path},
                  {"variant", variant_str}},
                 tcfg.seed, config_path, models::config_hash(cfg),
                 {{"model", models::to_json(cfg)}, {"k", k},
                  {"train", train_settings_json(tcfg)}});
  std::cout << "mean accuracy: " << cv.mean.at("accuracy") << " (variance "
            << cv.variance.at("accuracy") << ")\n";
  std::cout << "report written to " << out.file("cv_report.json") << "\n";
  return 0;
}

int run_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& variant_str, const std::string& emb_path,
                 const std::string& out_path, int threads) {
  const auto variant = parse_variant(variant_str);
  OutDir out(out_path);
  const auto ckpt = engine::load_checkpoint(ckpt_path);
  const auto records = corpus::parse_liar(data_path, variant);
  harness::MetricsReport report;
  const std::string family = ckpt.meta.value("model_family", "branch-net");
  if (family == "branch-net") {
    const auto cfg = models::config_from_json(ckpt.meta.at("config"));
    const auto table = text::load_embeddings(emb_path, cfg.embedding_dim);
    auto loaded = load_net_checkpoint(ckpt, table);
    harness::Pipeline pipe{loaded.cfg, loaded.stats,
                           loaded.net->metadata_encoder()};
    const auto examples = harness::encode_records(
        corpus::impute_missing(records, loaded.stats), table, pipe);
    const auto eval = harness::evaluate_model(*loaded.net, examples,
                                              loaded.threshold, threads);
    report.model = models::kind_name(loaded.cfg.kind);
    report.label_space = models::label_space_name(loaded.cfg.label_space);
    report.test = harness::metrics(eval.cm);
    report.config_hash = models::config_hash(loaded.cfg);
    report.seed = ckpt.meta.value("seed", std::uint64_t{0});
    report.threshold = loaded.threshold;
    report.max_len_s = loaded.cfg.max_len_s;
    report.max_len_j = loaded.cfg.max_len_j;
  } else {
    const auto dim = ckpt.meta.at("dim").get<std::size_t>();
    const bool use_just = ckpt.meta.at("feature_spec").at("use_justification");
    const auto loaded_table =
        text::load_embeddings(emb_path, (dim - 5) / (use_just ? 2 : 1));
    auto loaded = load_regression_checkpoint(ckpt, loaded_table);
    const auto imputed = corpus::impute_missing(records, loaded.stats);
    const auto x = models::regression_features(imputed, loaded_table, loaded.spec);
    std::vector<int> y;
    for (const auto& r : imputed) y.push_back(corpus::class_of(r, loaded.space));
    report = harness::evaluate_regression(loaded.model, x, y,
                                          corpus::num_classes(loaded.space),
                                          loaded.space);
    report.seed = ckpt.meta.value("seed", std::uint64_t{0});
  }
  report.split_manifest = data_path;
  harness::write_json(out.file("report.json"), harness::to_json(report));
  write_manifest(out, "evaluate",
                 {{"checkpoint", ckpt_path}, {"data", data_path},
                  {"embeddings", emb_path}, {"variant", variant_str}},
                 report.seed, "", report.config_hash, json::object());
  std::cout << "accuracy: " << report.test.accuracy << "\n";
  std::cout << "report written to " << out.file("report.json") << "\n";
  return 0;
}

int run_predict(const std::string& ckpt_path, const std::string& data_path,
                const std::string& variant_str, const std::string& emb_path,
                const std::string& out_path) {
  const auto variant = parse_variant(variant_str);
  OutDir out(out_path);
  const auto ckpt = engine::load_checkpoint(ckpt_path);
  // the label column may be empty in prediction inputs
  const auto records = corpus::parse_liar(data_path, variant, false);
  std::ofstream pred(out.file("predictions.tsv"));
  if (!pred) throw std::runtime_error("cannot open predictions file");
  const std::string family = ckpt.meta.value("model_family", "branch-net");
  std::uint64_t seed = ckpt.meta.value("seed", std::uint64_t{0});
  if (family == "branch-net") {
    const auto cfg = models::config_from_json(ckpt.meta.at("config"));
    const auto table = text::load_embeddings(emb_path, cfg.embedding_dim);
    auto loaded = load_net_checkpoint(ckpt, table);
    harness::Pipeline pipe{loaded.cfg, loaded.stats,
                           loaded.net->metadata_encoder()};
    const auto examples = harness::encode_records(
        corpus::impute_missing(records, loaded.stats), table, pipe);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto probs =
          loaded.net->forward(examples[i], engine::Mode::eval, nullptr, nullptr);
      const int cls = loaded.net->predict_class(probs, loaded.threshold);
      pred << records[i].id << '\t'
           << corpus::class_name(cls, loaded.cfg.label_space);
      for (double p : probs) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "\t%.6f", p);
        pred << buf;
      }
      pred << '\n';
    }
  } else {
    const auto dim = ckpt.meta.at("dim").get<std::size_t>();
    const bool use_just = ckpt.meta.at("feature_spec").at("use_justification");
    const auto table =
        text::load_embeddings(emb_path, (dim - 5) / (use_just ? 2 : 1));
    auto loaded = load_regression_checkpoint(ckpt, table);
    const auto imputed = corpus::impute_missing(records, loaded.stats);
    const auto x = models::regression_features(imputed, table, loaded.spec);
    for (std::size_t i = 0; i < imputed.size(); ++i) {
      const int cls = loaded.model.predict(x.data() + i * loaded.model.dim);
      pred << records[i].id << '\t' << corpus::class_name(cls, loaded.space)
           << '\n';
    }
  }
  write_manifest(out, "predict",
                 {{"checkpoint", ckpt_path}, {"data", data_path},
                  {"embeddings", emb_path}, {"variant", variant_str}},
                 seed, "", "", json::object());
  std::cout << records.size() << " predictions written to "
            << out.file("predictions.tsv") << "\n";
  return 0;
}

int run_compare(const std::vector<std::string>& report_paths,
                const std::string& out_path) {
  OutDir out(out_path);
  std::vector<harness::MetricsReport> reports;
  for (const auto& path : report_paths)
    reports.push_back(harness::report_from_json(harness::read_json(path)));
  const auto result = harness::compare(reports);
  harness::write_json(out.file("comparison.json"), result);
  write_manifest(out, "compare", {{"reports", report_paths}}, 0, "", "",
                 json::object());
  std::cout << "model ranking (" << result["label_space"].get<std::string>()
            << "):\n";
  for (const auto& e : result["entries"])
    std::cout << "  " << e["model"].get<std::string>() << "  accuracy "
              << e["accuracy"].get<double>() << "\n";
  for (auto& [name, v] : result["verdicts"].items()) {
    if (v.contains("holds"))
      std::cout << name << ": " << (v["holds"].get<bool>() ? "holds" : "fails")
                << " (delta " << v["delta"].get<double>() << ")\n";
  }
  std::cout << "report written to " << out.file("comparison.json") << "\n";
  return 0;
}

int run_score_speaker(double btc, double fc, double htc, double mtc, double pfc,
                      double w, double b, const std::string& ckpt_path,
                      const std::string& out_path) {
  credit::CreditScoreParams params;
  params.w = w;
  params.b = b;
  if (!ckpt_path.empty()) {
    const auto ckpt = engine::load_checkpoint(ckpt_path);
    params.w = ckpt.tensor("c.w").v[0];
    params.b = ckpt.tensor("c.b").v[0];
  }
  const corpus::CreditCounts counts{btc, fc, htc, mtc, pfc};
  const double ratio = credit::history_ratio(counts);
  const double score = credit::credit_score(counts, params);
  char line[128];
  std::snprintf(line, sizeof line, "history_ratio\t%.17g\ncredit_score\t%.17g\n",
                ratio, score);
  std::cout << line;
  if (!out_path.empty()) {
    OutDir out(out_path);
    harness::write_json(out.file("score.json"),
                        {{"history_ratio", ratio},
                         {"credit_score", score},
                         {"w", params.w},
                         {"b", params.b}});
    write_manifest(out, "score-speaker",
                   {{"checkpoint", ckpt_path}}, 0, "", "",
                   {{"counts", {btc, fc, htc, mtc, pfc}}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"claim veracity pipeline: corpus preparation, credit scoring, "
               "branch-network and regression training, cross-validation"};
  app.require_subcommand(1);

  // prepare ------------------------------------------------------------
  auto* prep = app.add_subcommand("prepare",
                                  "parse, validate and normalize TSV data; "
                                  "emit split manifests");
  std::string prep_data, prep_valid, prep_test, prep_variant = "liar-plus",
              prep_out = "out";
  double prep_train_frac = 0.8, prep_valid_frac = 0.1;
  std::uint64_t prep_seed = 0;
  prep->add_option("--data", prep_data, "input TSV (training file when --valid/--test given)")
      ->required();
  prep->add_option("--valid", prep_valid, "validation TSV");
  prep->add_option("--test", prep_test, "test TSV");
  prep->add_option("--variant", prep_variant, "liar or liar-plus");
  prep->add_option("--out", prep_out, "output directory")->required();
  prep->add_option("--train-frac", prep_train_frac, "train fraction for single-file splits");
  prep->add_option("--valid-frac", prep_valid_frac, "validation fraction for single-file splits");
  prep->add_option("--seed", prep_seed, "split seed");

  // train --------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  std::string tr_model, tr_labels = "binary", tr_train, tr_valid, tr_test,
              tr_variant = "liar-plus", tr_emb, tr_out = "out", tr_config;
  harness::TrainConfig tr_cfg;
  CLI::Option *tr_epochs_opt, *tr_batch_opt;
  ModelFlagOverrides tr_flags;
  train->add_option("--model", tr_model, "model kind")->required();
  train->add_option("--labels", tr_labels, "binary or six");
  train->add_option("--train", tr_train, "training TSV")->required();
  train->add_option("--valid", tr_valid, "validation TSV");
  train->add_option("--test", tr_test, "test TSV");
  train->add_option("--variant", tr_variant, "liar or liar-plus");
  train->add_option("--embeddings", tr_emb, "embedding vectors file")->required();
  train->add_option("--out", tr_out, "output directory")->required();
  train->add_option("--config", tr_config, "model config JSON (flags override it)");
  tr_epochs_opt = train->add_option("--epochs", tr_cfg.epochs, "epoch cap");
  tr_batch_opt = train->add_option("--batch", tr_cfg.batch_size, "batch size");
  train->add_option("--lr", tr_cfg.lr, "learning rate");
  train->add_option("--patience", tr_cfg.patience, "early stopping patience");
  train->add_option("--seed", tr_cfg.seed, "run seed");
  train->add_option("--threads", tr_cfg.threads, "worker threads");
  train->add_option("--threshold", tr_cfg.threshold, "binary decision threshold");
  tr_flags.attach(train);

  // cv -----------------------------------------------------------------
  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
  std::vector<std::string> cv_data;
  std::string cv_model, cv_labels = "binary", cv_variant = "liar-plus", cv_emb,
              cv_out = "out", cv_config;
  int cv_k = 5;
  harness::TrainConfig cv_tcfg;
  CLI::Option *cv_epochs_opt, *cv_batch_opt;
  ModelFlagOverrides cv_flags;
  cv->add_option("--model", cv_model, "model kind")->required();
  cv->add_option("--labels", cv_labels, "binary or six");
  cv->add_option("--data", cv_data, "TSV file(s) forming the CV pool")
      ->required()
      ->expected(-1);
  cv->add_option("--variant", cv_variant, "liar or liar-plus");
  cv->add_option("--embeddings", cv_emb, "embedding vectors file")->required();
  cv->add_option("--k", cv_k, "number of folds");
  cv->add_option("--out", cv_out, "output directory")->required();
  cv->add_option("--config", cv_config, "model config JSON (flags override it)");
  cv_epochs_opt = cv->add_option("--epochs", cv_tcfg.epochs, "epoch cap");
  cv_batch_opt = cv->add_option("--batch", cv_tcfg.batch_size, "batch size");
  cv->add_option("--lr", cv_tcfg.lr, "learning rate");
  cv->add_option("--patience", cv_tcfg.patience, "early stopping patience");
  cv->add_option("--seed", cv_tcfg.seed, "run seed");
  cv->add_option("--threads", cv_tcfg.threads, "worker threads");
  cv->add_option("--threshold", cv_tcfg.threshold, "binary decision threshold");
  cv_flags.attach(cv);

  // evaluate -----------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "metrics from a checkpoint on a data file");
  std::string ev_ckpt, ev_data, ev_variant = "liar-plus", ev_emb, ev_out = "out";
  int ev_threads = 1;
  eval->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  eval->add_option("--data", ev_data, "labeled TSV")->required();
  eval->add_option("--variant", ev_variant, "liar or liar-plus");
  eval->add_option("--embeddings", ev_emb, "embedding vectors file")->required();
  eval->add_option("--out", ev_out, "output directory")->required();
  eval->add_option("--threads", ev_threads, "worker threads");

  // predict ------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "label a TSV of statements");
  std::string pr_ckpt, pr_data, pr_variant = "liar-plus", pr_emb, pr_out = "out";
  predict->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
  predict->add_option("--data", pr_data, "TSV to label (label column may be empty)")
      ->required();
  predict->add_option("--variant", pr_variant, "liar or liar-plus");
  predict->add_option("--embeddings", pr_emb, "embedding vectors file")->required();
  predict->add_option("--out", pr_out, "output directory")->required();

  // compare ------------------------------------------------------------
  auto* comp = app.add_subcommand("compare", "hypothesis ordering report");
  std::vector<std::string> cmp_reports;
  std::string cmp_out = "out";
  comp->add_option("--reports", cmp_reports, "metrics report JSON files")
      ->required()
      ->expected(-1);
  comp->add_option("--out", cmp_out, "output directory")->required();

  // score-speaker --------------------------------------------------------
  auto* score = app.add_subcommand("score-speaker",
                                   "history ratio and credit score for counts");
  double sc_btc = 0, sc_fc = 0, sc_htc = 0, sc_mtc = 0, sc_pfc = 0, sc_w = 1,
         sc_b = 0;
  std::string sc_ckpt, sc_out;
  score->add_option("--btc", sc_btc, "barely-true count");
  score->add_option("--fc", sc_fc, "false count");
  score->add_option("--htc", sc_htc, "half-true count");
  score->add_option("--mtc", sc_mtc, "mostly-true count");
  score->add_option("--pfc", sc_pfc, "pants-on-fire count");
  score->add_option("--w", sc_w, "credit weight");
  score->add_option("--b", sc_b, "credit bias");
  score->add_option("--checkpoint", sc_ckpt, "read w and b from a checkpoint");
  score->add_option("--out", sc_out, "optional output directory");

  try {
    app.parse(argc, argv);
    if (*prep)
      return run_prepare(prep_data, prep_valid, prep_test, prep_variant,
                         prep_out, prep_train_frac, prep_valid_frac, prep_seed);
    if (*train) {
      const auto cfg = resolve_config(tr_model, tr_labels, tr_config, tr_flags);
      harness::TrainConfig tcfg = tr_cfg;
      const auto defaults = harness::default_train_config(cfg.kind, cfg.label_space);
      if (!tr_epochs_opt->count()) tcfg.epochs = defaults.epochs;
      if (!tr_batch_opt->count()) tcfg.batch_size = defaults.batch_size;
      return run_train(cfg, tr_train, tr_valid, tr_test, tr_variant, tr_emb,
                       tcfg, tr_out, tr_config);
    }
    if (*cv) {
      const auto cfg = resolve_config(cv_model, cv_labels, cv_config, cv_flags);
      harness::TrainConfig tcfg = cv_tcfg;
      const auto defaults = harness::default_train_config(cfg.kind, cfg.label_space);
      if (!cv_epochs_opt->count()) tcfg.epochs = defaults.epochs;
      if (!cv_batch_opt->count()) tcfg.batch_size = defaults.batch_size;
      return run_cv(cfg, cv_data, cv_variant, cv_emb, cv_k, tcfg, cv_out,
                    cv_config);
    }
    if (*eval)
      return run_evaluate(ev_ckpt, ev_data, ev_variant, ev_emb, ev_out,
                          ev_threads);
    if (*predict)
      return run_predict(pr_ckpt, pr_data, pr_variant, pr_emb, pr_out);
    if (*comp) return run_compare(cmp_reports, cmp_out);
    if (*score)
      return run_score_speaker(sc_btc, sc_fc, sc_htc, sc_mtc, sc_pfc, sc_w,
                               sc_b, sc_ckpt, sc_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
