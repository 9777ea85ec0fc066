#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "support.hpp"
#include "veracity/corpus.hpp"
#include "veracity/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "veracity_cli_tests";

int run_cli(const std::string& args, const fs::path& stdout_file = {},
            const fs::path& stderr_file = {}) {
  std::string cmd = std::string(VERACITY_CLI_PATH) + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
  if (!stderr_file.empty()) cmd += " 2> " + stderr_file.string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

void write_embedding_file(const fs::path& path, std::size_t dim,
                          std::uint64_t seed) {
  veracity::Rng rng(seed);
  std::ofstream out(path);
  for (const auto& tok : testsupport::synthetic_vocab()) {
    out << tok;
    for (std::size_t k = 0; k < dim; ++k) out << ' ' << rng.normal(0.0, 0.5);
    out << '\n';
  }
}

struct CliWorld {
  fs::path dir = kWork;
  fs::path data = kWork / "data.tsv";
  fs::path embeddings = kWork / "vectors.txt";

  CliWorld() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    testsupport::SyntheticSpec spec;
    spec.records = 120;
    veracity::corpus::write_liar(data.string(),
                                 testsupport::synthetic_records(spec, 33),
                                 veracity::corpus::Variant::liar_plus);
    write_embedding_file(embeddings, 5, 99);
  }
};

const std::string kTinyModelFlags =
    " --embedding-dim 5 --lstm-hidden 4 --s-dense 3 --m-dense 3 --j-dense 2"
    " --meta-width 2 --epochs 2 --batch 16 --seed 7 ";

}  // namespace

TEST_CASE("score-speaker prints the ratio and score", "[cli]") {
  const fs::path out = kWork / "score_stdout.txt";
  fs::create_directories(kWork);
  REQUIRE(run_cli("score-speaker --btc 0 --fc 0 --htc 0 --mtc 5 --pfc 0 --w 1 --b 0",
                  out) == 0);
  const auto text = slurp(out);
  double ratio = 0, score = 0;
  REQUIRE(std::sscanf(text.c_str(), "history_ratio\t%lf\ncredit_score\t%lf",
                      &ratio, &score) == 2);
  CHECK(ratio == Catch::Approx(0.2).margin(1e-12));
  CHECK(score == Catch::Approx(0.19737532022490401).margin(1e-9));
}

TEST_CASE("missing files fail with the path in the diagnostic", "[cli]") {
  const fs::path err = kWork / "train_err.txt";
  fs::create_directories(kWork);
  const int code = run_cli(
      "train --model seq --labels binary --train /no/such/file.tsv"
      " --embeddings /also/missing.txt --out " + (kWork / "x").string(),
      {}, err);
  CHECK(code != 0);
  CHECK(slurp(err).find("/no/such/file.tsv") != std::string::npos);
}

TEST_CASE("unknown subcommands and flags exit nonzero", "[cli]") {
  fs::create_directories(kWork);
  CHECK(run_cli("frobnicate", kWork / "u1.txt", kWork / "u1e.txt") != 0);
  CHECK(run_cli("train --definitely-not-a-flag 3", kWork / "u2.txt",
                kWork / "u2e.txt") != 0);
}

TEST_CASE("prepare, train, evaluate, predict and compare chain together",
          "[cli][slow]") {
  CliWorld world;
  const fs::path prep = world.dir / "prep";
  REQUIRE(run_cli("prepare --data " + world.data.string() +
                      " --variant liar-plus --seed 3 --out " + prep.string(),
                  world.dir / "prep_out.txt") == 0);
  REQUIRE(fs::exists(prep / "train.tsv"));
  REQUIRE(fs::exists(prep / "valid.tsv"));
  REQUIRE(fs::exists(prep / "test.tsv"));
  const auto manifest = json::parse(slurp(prep / "split_manifest.json"));
  CHECK(manifest["train"].size() + manifest["validation"].size() +
            manifest["test"].size() ==
        120);
  CHECK(json::parse(slurp(prep / "run_manifest.json"))["command"] == "prepare");

  const fs::path run1 = world.dir / "run1";
  const std::string common =
      " --labels binary --train " + (prep / "train.tsv").string() +
      " --valid " + (prep / "valid.tsv").string() +
      " --test " + (prep / "test.tsv").string() +
      " --embeddings " + world.embeddings.string() + kTinyModelFlags;
  REQUIRE(run_cli("train --model seq-just" + common + " --out " + run1.string(),
                  world.dir / "train1_out.txt") == 0);
  REQUIRE(fs::exists(run1 / "model.ckpt"));
  REQUIRE(fs::exists(run1 / "report.json"));
  REQUIRE(fs::exists(run1 / "loss_train.tsv"));
  const auto report = json::parse(slurp(run1 / "report.json"));
  const double trained_acc = report["test"]["accuracy"];

  SECTION("evaluate reproduces the training-time test metrics") {
    const fs::path ev = world.dir / "eval1";
    REQUIRE(run_cli("evaluate --checkpoint " + (run1 / "model.ckpt").string() +
                        " --data " + (prep / "test.tsv").string() +
                        " --embeddings " + world.embeddings.string() +
                        " --out " + ev.string(),
                    world.dir / "eval_out.txt") == 0);
    const auto eval_report = json::parse(slurp(ev / "report.json"));
    CHECK(eval_report["test"]["accuracy"].get<double>() == trained_acc);
    // a second evaluation is byte-identical
    const fs::path ev2 = world.dir / "eval2";
    REQUIRE(run_cli("evaluate --checkpoint " + (run1 / "model.ckpt").string() +
                        " --data " + (prep / "test.tsv").string() +
                        " --embeddings " + world.embeddings.string() +
                        " --out " + ev2.string(),
                    world.dir / "eval2_out.txt") == 0);
    CHECK(slurp(ev / "report.json") == slurp(ev2 / "report.json"));
  }

  SECTION("predictions cover every input row") {
    const fs::path pr = world.dir / "pred";
    REQUIRE(run_cli("predict --checkpoint " + (run1 / "model.ckpt").string() +
                        " --data " + (prep / "test.tsv").string() +
                        " --embeddings " + world.embeddings.string() +
                        " --out " + pr.string(),
                    world.dir / "pred_out.txt") == 0);
    CHECK(line_count(pr / "predictions.tsv") ==
          line_count(prep / "test.tsv"));
  }

  SECTION("compare ranks reports that share a split") {
    const fs::path run2 = world.dir / "run2";
    REQUIRE(run_cli("train --model seq" + common + " --out " + run2.string(),
                    world.dir / "train2_out.txt") == 0);
    const fs::path cmp = world.dir / "cmp";
    REQUIRE(run_cli("compare --reports " + (run1 / "report.json").string() +
                        " " + (run2 / "report.json").string() + " --out " +
                        cmp.string(),
                    world.dir / "cmp_out.txt") == 0);
    const auto comparison = json::parse(slurp(cmp / "comparison.json"));
    REQUIRE(comparison["entries"].size() == 2);
    CHECK(comparison.contains("verdicts"));
  }
}

TEST_CASE("cv runs the regression baselines end to end", "[cli][slow]") {
  CliWorld world;
  const fs::path out = world.dir / "cv";
  REQUIRE(run_cli("cv --model logreg-ovr --labels six --data " +
                      world.data.string() + " --embeddings " +
                      world.embeddings.string() +
                      " --embedding-dim 5 --k 5 --seed 7 --out " + out.string(),
                  world.dir / "cv_out.txt") == 0);
  const auto report = json::parse(slurp(out / "cv_report.json"));
  CHECK(report["k"] == 5);
  REQUIRE(report["folds"].size() == 5);
  CHECK(report["mean"].contains("accuracy"));
  CHECK(report["variance_kind"] == "population");
}
