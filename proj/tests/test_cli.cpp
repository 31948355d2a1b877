#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fsl/cli.hpp"
#include "fsl/dataset.hpp"
#include "fsl/error.hpp"
#include "fsl/serialize.hpp"
#include "test_util.hpp"

using namespace fsl;
namespace fs = std::filesystem;
using fsl::testing::data_dir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "fsl");
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_path() { return (data_dir() / "tiny_multiclass.json").string(); }

}  // namespace

TEST(Cli, EvaluateWritesReport) {
  const auto dir = fsl::testing::temp_dir("cli_eval");
  const Outcome r = run({"evaluate", "--config", config_path(), "--out", (dir / "rep").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rep" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "report.txt"));
  EXPECT_NE(r.out.find("feature_space"), std::string::npos);
}

TEST(Cli, IdenticalRunsIdenticalFiles) {
  const auto dir = fsl::testing::temp_dir("cli_repeat");
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run({"evaluate", "--config", config_path(), "--out", (dir / sub).string()}).code, 0);
  }
  EXPECT_EQ(slurp(dir / "a" / "report.txt"), slurp(dir / "b" / "report.txt"));
  json a = read_json_file(dir / "a" / "report.json");
  json b = read_json_file(dir / "b" / "report.json");
  for (json* j : {&a, &b})
    for (auto& m : (*j)["methods"]) m.erase("wall_time_s");
  EXPECT_EQ(a, b);
}

TEST(Cli, OverridesAndSeed) {
  const auto dir = fsl::testing::temp_dir("cli_set");
  const Outcome r = run({"evaluate", "--config", config_path(), "--set", "repetitions=2", "--set",
                     "methods=[\"svd\"]", "--seed", "9", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = read_json_file(dir / "report.json");
  EXPECT_EQ(rep["config"]["repetitions"], 2);
  EXPECT_EQ(rep["config"]["base_seed"], 9);
  EXPECT_EQ(rep["methods"].size(), 1u);
}

TEST(Cli, UnknownOverrideKey) {
  const Outcome r = run({"evaluate", "--config", config_path(), "--set", "repetition=2", "--out", "/tmp/x"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(r.err.rfind("fsl: error[usage]:", 0), 0u) << r.err;
}

TEST(Cli, UnknownFlagShowsUsage) {
  const Outcome r = run({"evaluate", "--config", config_path(), "--out", "/tmp/x", "--bogus"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(r.err.rfind("fsl: error[usage]:", 0), 0u);
  EXPECT_NE(r.err.find("--config"), std::string::npos);
}

TEST(Cli, MissingSubcommand) { EXPECT_EQ(run({}).code, cli::kExitUsage); }

TEST(Cli, SnmfOnFourClassesIsDataError) {
  std::mt19937_64 gen(1);
  const auto dir = fsl::testing::temp_dir("cli_snmf");
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i % 4;
  write_feature_csv(LabeledDataset(fsl::testing::random_nonnegative(40, 6, gen), labels), dir / "four.csv");
  write_text_file(dir / "cfg.json", R"({"dataset_path": "four.csv", "train_per_class": 5,
    "test_per_class": 5, "methods": ["snmf"], "dims": {"snmf": 2},
    "knn": {"k_values": [1]}, "factorization": {"iters": 10}})");
  const Outcome r = run({"evaluate", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_EQ(r.err.rfind("fsl: error[NotBinary]:", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("snmf"), std::string::npos);
}

TEST(Cli, MissingDatasetIsDataError) {
  const auto dir = fsl::testing::temp_dir("cli_missing");
  write_text_file(dir / "cfg.json", R"({"dataset_path": "nope.csv", "train_per_class": 1,
    "test_per_class": 1, "methods": ["svd"]})");
  const Outcome r = run({"evaluate", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_EQ(r.err.rfind("fsl: error[IoError]:", 0), 0u) << r.err;
}

TEST(Cli, HelpOnEverySubcommand) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> subs = {
      {"split", {"--config", "--out", "--set", "--seed"}},
      {"fit", {"--config", "--out", "--method", "--dims"}},
      {"transform", {"--model", "--input", "--out", "--seed"}},
      {"evaluate", {"--config", "--out", "--set", "--seed"}},
      {"sweep", {"--config", "--out", "--method", "--dims"}},
      {"init-study", {"--config", "--out", "--dims", "--inits"}},
  };
  for (const auto& [sub, flags] : subs) {
    const Outcome r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << sub << " " << f;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, SplitFitTransform) {
  const auto dir = fsl::testing::temp_dir("cli_pipeline");
  ASSERT_EQ(run({"split", "--config", config_path(), "--out", (dir / "split").string()}).code, 0);
  const auto train = load_feature_csv(dir / "split" / "train.csv");
  EXPECT_EQ(train.size(), 36);
  EXPECT_EQ(load_feature_csv(dir / "split" / "test.csv").size(), 24);

  Outcome r = run({"fit", "--config", config_path(), "--method", "svd", "--dims", "3", "--out",
               (dir / "svd").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"transform", "--model", (dir / "svd" / "model.json").string(), "--input",
           (dir / "split" / "test.csv").string(), "--out", (dir / "proj").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto projected = load_feature_csv(dir / "proj" / "projected.csv");
  EXPECT_EQ(projected.dims(), 3);
  EXPECT_EQ(projected.size(), 24);

  r = run({"fit", "--config", config_path(), "--method", "nmf", "--dims", "2", "--set",
           "factorization.iters=30", "--out", (dir / "nmf").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "nmf" / "trace.csv"));
  r = run({"transform", "--model", (dir / "nmf" / "model.json").string(), "--input",
           (dir / "split" / "test.csv").string(), "--out", (dir / "nproj").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_feature_csv(dir / "nproj" / "projected.csv").dims(), 2);

  r = run({"fit", "--config", config_path(), "--method", "pca", "--out", (dir / "x").string()});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST(Cli, SweepAndInitStudy) {
  const auto dir = fsl::testing::temp_dir("cli_sweep");
  Outcome r = run({"sweep", "--config", config_path(), "--method", "svd", "--dims", "1,2,3", "--out",
               (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "s" / "sweep.csv"));
  r = run({"sweep", "--config", config_path(), "--method", "svd", "--dims", "0", "--out",
           (dir / "s0").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  r = run({"sweep", "--config", config_path(), "--method", "svd", "--dims", "a,b", "--out",
           (dir / "s1").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"init-study", "--config", config_path(), "--dims", "2,3", "--inits", "3", "--set",
           "factorization.iters=20", "--out", (dir / "i").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "i" / "init_study.csv"));
}

TEST(Cli, ExitCodeClassification) {
  EXPECT_TRUE(is_numerical(ErrorCode::NotPositiveDefinite));
  EXPECT_TRUE(is_numerical(ErrorCode::RecursionBreakdown));
  EXPECT_TRUE(is_numerical(ErrorCode::NumericalFailure));
  EXPECT_FALSE(is_numerical(ErrorCode::NotBinary));
  EXPECT_FALSE(is_numerical(ErrorCode::IoError));
}
