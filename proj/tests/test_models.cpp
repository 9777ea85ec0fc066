#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"
#include "veracity/engine/gradcheck.hpp"
#include "veracity/engine/loss.hpp"
#include "veracity/harness/train.hpp"
#include "veracity/models/config.hpp"
#include "veracity/models/metadata.hpp"
#include "veracity/models/network.hpp"
#include "veracity/models/regression.hpp"

using namespace veracity;
using namespace veracity::models;

namespace {

ModelConfig tiny_config(ModelKind kind, corpus::LabelSpace space) {
  auto cfg = default_config(kind, space);
  cfg.embedding_dim = 5;
  cfg.lstm_hidden = 4;
  cfg.s_dense = 3;
  cfg.m_dense = 3;
  cfg.j_dense = 2;
  cfg.meta_width = 2;
  cfg.max_len_s = 4;
  cfg.max_len_j = 5;
  return cfg;
}

struct TinyWorld {
  text::EmbeddingTable table = testsupport::synthetic_table(5, 61);
  std::vector<corpus::Record> records;
  corpus::TrainingStats stats;
  MetadataEncoder meta;

  TinyWorld() {
    testsupport::SyntheticSpec spec;
    spec.records = 30;
    spec.dim = 5;
    records = testsupport::synthetic_records(spec, 15);
    stats = corpus::training_stats(records);
    records = corpus::impute_missing(records, stats);
    meta = MetadataEncoder::build(records);
  }

  ModelInput encode(const corpus::Record& r, const ModelConfig& cfg) const {
    ModelInput in;
    in.stmt = text::encode(text::tokenize(r.statement), table, cfg.max_len_s);
    if (has_j_branch(cfg.kind))
      in.just = text::encode(text::tokenize(*r.justification), table, cfg.max_len_j);
    in.meta = meta.encode(r);
    in.counts = r.credit_counts();
    in.target = corpus::class_of(r, cfg.label_space);
    return in;
  }
};

}  // namespace

TEST_CASE("branch widths follow the configuration", "[models]") {
  TinyWorld world;
  SECTION("the full four-branch layout fuses 32+64+32") {
    auto cfg = default_config(ModelKind::enhanced, corpus::LabelSpace::binary);
    CHECK(cfg.fused_width() == 128);
    CHECK(cfg.output_width() == 1);
    cfg = default_config(ModelKind::enhanced, corpus::LabelSpace::six);
    CHECK(cfg.output_width() == 6);
  }
  SECTION("the justification-free model has two input branches") {
    const auto cfg = tiny_config(ModelKind::seq, corpus::LabelSpace::binary);
    BranchNet net(cfg, &world.table, world.meta, 1);
    CHECK(cfg.fused_width() == cfg.s_dense + cfg.m_dense);
    CHECK_THROWS_AS(net.params().by_name("j.dense.w"), std::out_of_range);
    CHECK_THROWS_AS(net.params().by_name("c.w"), std::out_of_range);
  }
  SECTION("dimension mismatches are rejected") {
    auto cfg = tiny_config(ModelKind::seq, corpus::LabelSpace::binary);
    cfg.embedding_dim = 7;  // table is 5-wide
    CHECK_THROWS_AS(BranchNet(cfg, &world.table, world.meta, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("trainable parameter counts match the closed form", "[models]") {
  TinyWorld world;
  for (const auto kind : {ModelKind::seq, ModelKind::seq_just,
                          ModelKind::enhanced, ModelKind::siamese_shared}) {
    for (const auto space : {corpus::LabelSpace::binary, corpus::LabelSpace::six}) {
      auto cfg = tiny_config(kind, space);
      BranchNet net(cfg, &world.table, world.meta, 3);
      CHECK(net.params().value_count() ==
            expected_param_count(cfg, world.meta, world.table.rows()));
    }
  }
  SECTION("trainable embeddings add the table") {
    auto cfg = tiny_config(ModelKind::seq, corpus::LabelSpace::binary);
    cfg.trainable_embeddings = true;
    BranchNet net(cfg, &world.table, world.meta, 3);
    CHECK(net.params().value_count() ==
          expected_param_count(cfg, world.meta, world.table.rows()));
  }
}

TEST_CASE("a shared encoder makes the branches move together", "[models]") {
  TinyWorld world;
  auto cfg = tiny_config(ModelKind::siamese_shared, corpus::LabelSpace::binary);
  cfg.max_len_j = cfg.max_len_s;
  BranchNet net(cfg, &world.table, world.meta, 9);
  auto rec = world.records[0];
  rec.justification = rec.statement;  // identical texts in both branches
  auto input = world.encode(rec, cfg);
  ForwardCache cache;
  net.forward(input, engine::Mode::eval, nullptr, &cache);
  CHECK(cache.s_h == cache.j_h);
  // updating the shared encoder changes both encoder outputs identically
  net.params().by_name("s.enc.lstm.wx").value.v[3] += 0.25;
  net.forward(input, engine::Mode::eval, nullptr, &cache);
  CHECK(cache.s_h == cache.j_h);
  // an unshared model keeps separate encoders
  auto cfg2 = tiny_config(ModelKind::seq_just, corpus::LabelSpace::binary);
  cfg2.max_len_j = cfg2.max_len_s;
  BranchNet net2(cfg2, &world.table, world.meta, 9);
  net2.forward(input, engine::Mode::eval, nullptr, &cache);
  CHECK(cache.s_h != cache.j_h);
}

TEST_CASE("head outputs are proper probabilities", "[models]") {
  TinyWorld world;
  SECTION("six-way outputs sum to one") {
    const auto cfg = tiny_config(ModelKind::enhanced, corpus::LabelSpace::six);
    BranchNet net(cfg, &world.table, world.meta, 17);
    for (int i = 0; i < 10; ++i) {
      const auto probs =
          net.forward(world.encode(world.records[i], cfg), engine::Mode::eval,
                      nullptr, nullptr);
      double sum = 0;
      for (double p : probs) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
  SECTION("binary output lives in [0,1] and zero head weights give 0.5") {
    const auto cfg = tiny_config(ModelKind::seq, corpus::LabelSpace::binary);
    BranchNet net(cfg, &world.table, world.meta, 23);
    const auto input = world.encode(world.records[1], cfg);
    auto probs = net.forward(input, engine::Mode::eval, nullptr, nullptr);
    CHECK(probs[0] >= 0.0);
    CHECK(probs[0] <= 1.0);
    net.params().by_name("head.w").value.fill(0.0);
    net.params().by_name("head.b").value.fill(0.0);
    probs = net.forward(input, engine::Mode::eval, nullptr, nullptr);
    CHECK(probs[0] == 0.5);
  }
}

TEST_CASE("every layer kind passes the finite-difference gradient check",
          "[models]") {
  TinyWorld world;
  const struct {
    ModelKind kind;
    corpus::LabelSpace space;
    bool trainable_embeddings;
  } cases[] = {
      {ModelKind::enhanced, corpus::LabelSpace::binary, false},
      {ModelKind::enhanced, corpus::LabelSpace::six, false},
      {ModelKind::siamese_shared, corpus::LabelSpace::binary, false},
      {ModelKind::seq, corpus::LabelSpace::six, true},
  };
  for (const auto& c : cases) {
    auto cfg = tiny_config(c.kind, c.space);
    cfg.trainable_embeddings = c.trainable_embeddings;
    BranchNet net(cfg, &world.table, world.meta, 31);
    const auto input = world.encode(world.records[2], cfg);
    const auto kind = c.space == corpus::LabelSpace::binary
                          ? engine::LossKind::binary
                          : engine::LossKind::categorical;
    // dropout masks are replayed identically on every evaluation
    const auto loss = [&] {
      Rng drop(424242);
      const auto probs = net.forward(input, engine::Mode::train, &drop, nullptr);
      return engine::cross_entropy(probs.data(), probs.size(), input.target, kind);
    };
    ForwardCache cache;
    Rng drop(424242);
    const auto probs = net.forward(input, engine::Mode::train, &drop, &cache);
    std::vector<double> dprobs(probs.size());
    engine::cross_entropy_grad(probs.data(), probs.size(), input.target, kind,
                               dprobs.data());
    auto grads = net.make_grad_accum();
    net.backward(input, cache, dprobs, grads);
    auto& params = net.params();
    params.zero_grads();
    for (std::size_t i = 0; i < params.size(); ++i) params[i].grad = grads[i];
    const auto res = engine::gradient_check(params, loss, 1e-4);
    INFO(kind_name(c.kind) << "/" << label_space_name(c.space) << " worst "
                           << res.worst_param << "[" << res.worst_index
                           << "] analytic " << res.analytic << " numeric "
                           << res.numeric);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradients cannot be requested before a forward pass", "[models]") {
  TinyWorld world;
  const auto cfg = tiny_config(ModelKind::seq, corpus::LabelSpace::binary);
  BranchNet net(cfg, &world.table, world.meta, 5);
  const auto input = world.encode(world.records[0], cfg);
  ForwardCache never_filled;
  auto grads = net.make_grad_accum();
  CHECK_THROWS_AS(net.backward(input, never_filled, {1.0}, grads),
                  std::logic_error);
}

TEST_CASE("a worse history shifts the fused activation uniformly", "[models]") {
  TinyWorld world;
  const auto cfg = tiny_config(ModelKind::enhanced, corpus::LabelSpace::binary);
  BranchNet net(cfg, &world.table, world.meta, 47);
  REQUIRE(net.params().by_name("c.w").value.v[0] > 0);  // initialized to 1
  auto input = world.encode(world.records[3], cfg);
  ForwardCache before, after;
  net.forward(input, engine::Mode::eval, nullptr, &before);
  input.counts.pants_on_fire += 10;
  net.forward(input, engine::Mode::eval, nullptr, &after);
  const double shift = after.fused[0] - before.fused[0];
  CHECK(shift > 0);
  for (std::size_t i = 0; i < before.fused.size(); ++i)
    CHECK(after.fused[i] - before.fused[i] == Catch::Approx(shift).margin(1e-12));
}

TEST_CASE("justification-hungry models reject records without one",
          "[models]") {
  testsupport::SyntheticSpec spec;
  spec.records = 12;
  spec.liar_plus = false;
  auto records = testsupport::synthetic_records(spec, 3);
  const auto stats = corpus::training_stats(records);
  records = corpus::impute_missing(records, stats);
  const auto table = testsupport::synthetic_table(5, 61);
  harness::Pipeline pipe{tiny_config(ModelKind::seq_just, corpus::LabelSpace::binary),
                         stats, MetadataEncoder::build(records)};
  CHECK_THROWS_WITH(harness::encode_records(records, table, pipe),
                    Catch::Matchers::ContainsSubstring("justification"));
}

TEST_CASE("plain least squares recovers an exact line", "[models]") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<int> y{0, 2, 4, 6};
  const auto model = fit_regression(ModelKind::linreg, x, y, 1, 7);
  CHECK(model.w[0] == Catch::Approx(2.0).margin(1e-8));
  CHECK(model.bias[0] == Catch::Approx(0.0).margin(1e-8));
  const double probe = 1.6;  // 3.2 rounds to class 3
  CHECK(model.predict(&probe) == 3);
  const double low = -5.0, high = 9.0;  // clamped to the class range
  CHECK(model.predict(&low) == 0);
  CHECK(model.predict(&high) == 6);
}

TEST_CASE("one-vs-rest logistic separates two clusters", "[models]") {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    x.push_back(-2.0 + rng.uniform(-0.1, 0.1));
    y.push_back(0);
    x.push_back(2.0 + rng.uniform(-0.1, 0.1));
    y.push_back(1);
  }
  const auto model = fit_regression(ModelKind::logreg_ovr, x, y, 1, 2);
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(model.predict(&x[i]) == y[i]);
}

TEST_CASE("two-class ordinal regression collapses to binary logistic",
          "[models]") {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const int cls = i % 2;
    x.push_back(rng.normal(cls == 0 ? -1.0 : 1.0, 1.0));
    y.push_back(cls);
  }
  RegressionHyper hyper;
  hyper.iters = 30000;
  hyper.lr = 0.1;
  hyper.lr_decay = 1e-6;
  const auto ordinal = fit_regression(ModelKind::ordinal_logreg, x, y, 1, 2, hyper);
  const auto logistic = fit_regression(ModelKind::logreg_ovr, x, y, 1, 2, hyper);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p_ord = ordinal.ordinal_prob(1, &x[i]);
    const double p_log = logistic.class_prob(1, &x[i]);
    CHECK(p_ord == Catch::Approx(p_log).margin(1e-6));
  }
}

TEST_CASE("ordinal thresholds stay strictly sorted", "[models]") {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(3);
  for (int i = 0; i < 240; ++i) {
    const double latent = rng.normal(0.0, 2.0);
    x.push_back(latent + rng.normal(0.0, 0.4));
    int cls = static_cast<int>(std::floor(latent + 3.0));
    y.push_back(std::clamp(cls, 0, 5));
  }
  for (int iters : {1, 7, 120}) {
    RegressionHyper hyper;
    hyper.iters = iters;
    const auto model = fit_regression(ModelKind::ordinal_logreg, x, y, 1, 6, hyper);
    REQUIRE(model.thresholds.size() == 5);
    for (std::size_t j = 1; j < model.thresholds.size(); ++j)
      CHECK(model.thresholds[j] > model.thresholds[j - 1]);
  }
}

TEST_CASE("six-class ordinal regression learns a monotone mapping",
          "[models]") {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(41);
  for (int i = 0; i < 600; ++i) {
    const double latent = rng.uniform(-3.0, 3.0);
    x.push_back(latent);
    y.push_back(std::clamp(static_cast<int>(std::floor(latent + 3.0)), 0, 5));
  }
  RegressionHyper hyper;
  hyper.iters = 3000;
  const auto model = fit_regression(ModelKind::ordinal_logreg, x, y, 1, 6, hyper);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (model.predict(&x[i]) == y[i]) ++correct;
  // the data is noise-free and exactly proportional-odds shaped
  CHECK(static_cast<double>(correct) / static_cast<double>(y.size()) > 0.9);
  // predictions are nondecreasing along the single feature
  int prev = model.predict(&x[0]);
  std::vector<double> sorted_x = x;
  std::sort(sorted_x.begin(), sorted_x.end());
  prev = model.predict(&sorted_x[0]);
  for (const double v : sorted_x) {
    const int cls = model.predict(&v);
    CHECK(cls >= prev);
    prev = cls;
  }
}

TEST_CASE("a feature matrix with no variance anywhere is rejected",
          "[models]") {
  const std::vector<double> x{1, 1, 1, 1};
  const std::vector<int> y{0, 1, 0, 1};
  for (const auto kind :
       {ModelKind::linreg, ModelKind::logreg_ovr, ModelKind::ordinal_logreg})
    CHECK_THROWS_AS(fit_regression(kind, x, y, 1, 2), std::invalid_argument);
}

TEST_CASE("metadata encoding maps unseen categories to the unknown row",
          "[models]") {
  TinyWorld world;
  corpus::Record stranger = world.records[0];
  stranger.speaker = "nobody-ever-seen";
  const auto enc = world.meta.encode(stranger);
  CHECK(enc.rows[static_cast<int>(MetaField::speaker)] ==
        std::vector<std::size_t>{0});
  const auto known = world.meta.encode(world.records[0]);
  CHECK(known.rows[static_cast<int>(MetaField::speaker)][0] >= 1);
  SECTION("serialized form round-trips") {
    const auto j = world.meta.to_json();
    const auto back = MetadataEncoder::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.encode(stranger).counts == enc.counts);
  }
  SECTION("counts are standardized against the training partition") {
    const auto means = world.meta.count_means();
    const auto stds = world.meta.count_stds();
    const auto& r = world.records[2];
    const auto e = world.meta.encode(r);
    for (int c = 0; c < corpus::kNumCountFields; ++c)
      CHECK(e.counts[c] ==
            Catch::Approx((*r.counts[c] - means[c]) / stds[c]).margin(1e-12));
  }
}

TEST_CASE("regression features blend embeddings and standardized counts",
          "[models]") {
  TinyWorld world;
  const auto spec = make_feature_spec(world.records, true);
  const auto x = regression_features(world.records, world.table, spec);
  const std::size_t d = spec.dim(world.table);
  CHECK(d == 2 * world.table.dim() + corpus::kNumCountFields);
  CHECK(x.size() == world.records.size() * d);
  // column means of the standardized counts are ~0 on the training partition
  for (int c = 0; c < corpus::kNumCountFields; ++c) {
    double mean = 0;
    for (std::size_t i = 0; i < world.records.size(); ++i)
      mean += x[i * d + (d - corpus::kNumCountFields) + static_cast<std::size_t>(c)];
    mean /= static_cast<double>(world.records.size());
    CHECK(std::abs(mean) < 1e-9);
  }
}
