// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "egtsyn/checkpoint.hpp"
#include "egtsyn/manifest.hpp"
#include "egtsyn/metrics.hpp"
#include "test_support.hpp"

namespace egtsyn::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> toy_data() {
  const fs::path toy = EGTSYN_TOY_DIR;
  return {"--data", (toy / "drugs.csv").string(), (toy / "cells.csv").string(),
          (toy / "synergy.csv").string()};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double probability(const std::string& out) {
  std::istringstream in(out);
  std::string word;
  double p = -1;
  in >> word >> p;
  return p;
}

// One small checkpoint shared by the round-trip tests.
class TrainedToy : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("cli");
    const Outcome o = invoke(with({"train"}, with(toy_data(), {"--variant", "GSyn", "--preset",
                                                              "tiny", "--epochs", "60", "--lr",
                                                              "0.01", "--batch-size", "16",
                                                              "--seed", "5", "--out",
                                                              ckpt().string()})));
    ASSERT_EQ(o.code, kExitOk) << o.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path ckpt() { return *dir_ / "gsyn.json"; }
  static const fs::path& dir() { return dir_->path(); }

 private:
  static inline test::TempDir* dir_ = nullptr;
};

TEST_F(TrainedToy, WritesHistoryAndManifest) {
  EXPECT_TRUE(fs::exists(dir() / "gsyn.history.csv"));
  const RunManifest m = manifest_from_json(slurp(dir() / "gsyn.manifest.json"));
  EXPECT_EQ(m.subcommand, "train");
  EXPECT_EQ(m.seed, 5u);
  EXPECT_EQ(m.flags.at("variant"), "GSyn");
  EXPECT_EQ(m.input_digests.size(), 3u);
  EXPECT_EQ(load_checkpoint(ckpt()).training.epoch, 60);
}

TEST_F(TrainedToy, EvaluateReportParsesBack) {
  const fs::path report = dir() / "eval.json";
  const Outcome o = invoke(with({"evaluate", "--ckpt", ckpt().string(), "--seed", "5", "--report",
                                 report.string()},
                                toy_data()));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const metrics::MetricsReport r = metrics::report_from_json(slurp(report));
  EXPECT_GT(r.n, 0u);
  EXPECT_EQ(slurp(dir() / "eval.csv"), o.out);
}

TEST_F(TrainedToy, TrainFoldScoresAtLeastTestFold) {
  auto acc = [&](const std::string& subset) {
    const fs::path report = dir() / (subset + ".json");
    const Outcome o = invoke(with({"evaluate", "--ckpt", ckpt().string(), "--seed", "5",
                                   "--subset", subset, "--report", report.string()},
                                  toy_data()));
    EXPECT_EQ(o.code, kExitOk) << o.err;
    return *metrics::report_from_json(slurp(report)).acc;
  };
  EXPECT_GE(acc("train"), acc("test"));
}

TEST_F(TrainedToy, PredictIsOrderSymmetric) {
  const fs::path cells = fs::path(EGTSYN_TOY_DIR) / "cells.csv";
  auto predict = [&](const char* a, const char* b) {
    return invoke({"predict", "--ckpt", ckpt().string(), "--drug-a", a, "--drug-b", b,
                   "--cell-id", "A549", "--cells", cells.string()});
  };
  const Outcome ab = predict("CC(=O)Oc1ccccc1C(=O)O", "Cn1cnc2c1c(=O)n(C)c(=O)n2C");
  const Outcome ba = predict("Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CC(=O)Oc1ccccc1C(=O)O");
  ASSERT_EQ(ab.code, kExitOk) << ab.err;
  EXPECT_EQ(ab.out, ba.out);
  EXPECT_NEAR(probability(ab.out), probability(ba.out), 1e-6);
  EXPECT_NE(ab.out.find("label "), std::string::npos);
}

TEST_F(TrainedToy, PredictUnknownCellNamesIt) {
  const fs::path cells = fs::path(EGTSYN_TOY_DIR) / "cells.csv";
  const Outcome o = invoke({"predict", "--ckpt", ckpt().string(), "--drug-a", "CCO", "--drug-b",
                            "CCN", "--cell-id", "HeLa", "--cells", cells.string()});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_NE(o.err.find("HeLa"), std::string::npos);
}

TEST(Featurize, PartialFailure) {
  test::TempDir dir("feat");
  std::ofstream(dir / "drugs.csv") << "drug_id,smiles\naspirin,CC(=O)Oc1ccccc1C(=O)O\n"
                                      "bad,C1CC\nethanol,CCO\n";
  const Outcome o = invoke({"featurize", "--drugs", (dir / "drugs.csv").string(), "--out",
                            (dir / "out").string()});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_TRUE(fs::exists(dir / "out" / "aspirin.graph.txt"));
  EXPECT_TRUE(fs::exists(dir / "out" / "ethanol.graph.txt"));
  EXPECT_FALSE(fs::exists(dir / "out" / "bad.graph.txt"));
  const std::string rejects = slurp(dir / "out" / "rejects.csv");
  EXPECT_NE(rejects.find("bad"), std::string::npos);

  std::istringstream summary(slurp(dir / "out" / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line, "drug_id,n_atoms,n_bonds,dual_nodes");
  int rows = 0;
  while (std::getline(summary, line)) {
    std::string id;
    int atoms = 0, bonds = 0, dual = 0;
    char c;
    std::istringstream fields(line);
    std::getline(fields, id, ',');
    fields >> atoms >> c >> bonds >> c >> dual;
    EXPECT_EQ(dual, atoms + bonds) << id;
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

TEST(Usage, UnknownVariantAndSubcommand) {
  test::TempDir dir("usage");
  EXPECT_EQ(invoke(with({"train", "--variant", "MegaSyn", "--out", (dir / "x.json").string()},
                        toy_data()))
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"transmogrify"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Usage, MissingCheckpointNamesPath) {
  test::TempDir dir("usage");
  const std::string missing = (dir / "nowhere.json").string();
  const Outcome o = invoke(
      with({"evaluate", "--ckpt", missing, "--report", (dir / "r.json").string()}, toy_data()));
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_NE(o.err.find("nowhere.json"), std::string::npos);
}

TEST(Config, FileFillsGapsAndFlagsWin) {
  test::TempDir dir("config");
  std::ofstream(dir / "run.cfg") << "# shared settings\nsplit = leave_drug\nseed = 3\n";
  const Outcome o = invoke(with({"split", "--config", (dir / "run.cfg").string(), "--seed", "8",
                                 "--out", (dir / "plan.json").string()},
                                toy_data()));
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const auto plan = nlohmann::json::parse(slurp(dir / "plan.json"));
  EXPECT_EQ(plan["protocol"], "leave_drug");
  EXPECT_EQ(plan["seed"], 8);
}

TEST(Gradcheck, PassesAndCatchesFaults) {
  const Outcome ok = invoke({"gradcheck", "--variant", "EGTSyn"});
  EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("PASS EGTSyn"), std::string::npos);
  const Outcome bad = invoke({"gradcheck", "--variant", "GSyn", "--fault", "matmul"});
  EXPECT_NE(bad.code, kExitOk);
  EXPECT_NE(bad.out.find("FAIL GSyn: worst parameter "), std::string::npos);
}

}  // namespace
}  // namespace egtsyn::cli
