#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cli_runner.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

using fpt::testing::CliRun;

CliRun fpt(const std::string& args) { return fpt::testing::run_cli(args); }

fs::path scratch(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("fpt_cli_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small three-frame scene shared by several tests.
const fs::path& small_scene() {
  static const fs::path dir = [] {
    const fs::path d = scratch("scene") / "s";
    const CliRun r = fpt("gen-scene --seed 3 --frames 3 --out " + d.string());
    EXPECT_EQ(r.code, 0) << r.out;
    return d;
  }();
  return dir;
}

std::string frame_args(const std::string& flag, int k) {
  char name[16];
  std::snprintf(name, sizeof name, "frame_%03d", k);
  const fs::path f = small_scene() / name;
  return " --" + flag + " " + (f / "cloud.fpt").string() + " " + (f / "scores.fpt").string();
}

std::string vote_args() {
  return frame_args("prev", 0) + frame_args("curr", 1) + frame_args("next", 2) + " --poses " +
         (small_scene() / "poses.txt").string();
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(fpt("").code, 2);
  EXPECT_EQ(fpt("no-such-command").code, 2);
  EXPECT_EQ(fpt("gen-scene --bogus 1").code, 2);
  const CliRun r = fpt("vote" + vote_args());  // --out missing
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.summary()["status"], "error");
  EXPECT_EQ(r.summary()["error"]["kind"], "usage");
}

TEST(Cli, ModuleErrorsExitWithOne) {
  const fs::path dir = scratch("module_error");
  const CliRun r = fpt("vote --prev a b --curr c d --next e f --out " + dir.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.summary()["status"], "error");
  const CliRun neg = fpt("vote" + vote_args() + " --sigma -1 --out " + dir.string());
  EXPECT_EQ(neg.code, 1);
}

TEST(Cli, GenSceneIsDeterministic) {
  const fs::path dir = scratch("gen_twice");
  const CliRun a = fpt("gen-scene --seed 7 --frames 2 --out " + (dir / "a").string());
  const CliRun b = fpt("gen-scene --seed 7 --frames 2 --out " + (dir / "b").string());
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(a.summary()["result"]["checksum"], b.summary()["result"]["checksum"]);
  EXPECT_EQ(a.summary()["result"]["files"], b.summary()["result"]["files"]);
  const CliRun c = fpt("gen-scene --seed 8 --frames 2 --out " + (dir / "c").string());
  EXPECT_NE(a.summary()["result"]["checksum"], c.summary()["result"]["checksum"]);
}

TEST(Cli, VoteWithZeroSigmaCopiesScores) {
  const fs::path dir = scratch("vote_zero");
  const CliRun r = fpt("vote" + vote_args() + " --sigma 0 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json res = r.summary()["result"];
  EXPECT_EQ(res["outputs"][0]["fnv1a64"], res["input_scores"]["fnv1a64"]);
  EXPECT_EQ(res["contributors"]["1"], res["points"]);
}

TEST(Cli, VoteThenEval) {
  const fs::path dir = scratch("vote_eval");
  ASSERT_EQ(fpt("vote" + vote_args() + " --out " + dir.string()).code, 0);
  const std::string truth = (small_scene() / "frame_001" / "class.fpt").string();
  const CliRun self = fpt("eval --pred " + truth + " --truth " + truth + " --classes 6");
  ASSERT_EQ(self.code, 0) << self.out;
  EXPECT_EQ(self.summary()["result"]["miou"], 1.0);
  const CliRun voted = fpt("eval --pred " + (dir / "labels.fpt").string() + " --truth " + truth +
                        " --classes 6");
  ASSERT_EQ(voted.code, 0) << voted.out;
  EXPECT_GT(voted.summary()["result"]["miou"].get<double>(), 0.0);
}

TEST(Cli, ConfigFilePrecedence) {
  const fs::path dir = scratch("toml");
  std::ofstream(dir / "cfg.toml") << "sigma = 0.9\n[vote]\nsigma = 0.5\nout = \"" +
                                         (dir / "v").string() + "\"\n";
  const std::string base = "vote" + vote_args() + " --config " + (dir / "cfg.toml").string();
  const CliRun from_file = fpt(base);
  ASSERT_EQ(from_file.code, 0) << from_file.out;
  EXPECT_EQ(from_file.summary()["config"]["sigma"], 0.5);
  const CliRun from_cli = fpt(base + " --sigma 0.1");
  ASSERT_EQ(from_cli.code, 0);
  EXPECT_EQ(from_cli.summary()["config"]["sigma"], 0.1);

  std::ofstream(dir / "shared.toml") << "sigma = 0.3\nsteps = 4\n";
  const CliRun shared = fpt("vote" + vote_args() + " --out " + (dir / "w").string() + " --config " +
                         (dir / "shared.toml").string());
  ASSERT_EQ(shared.code, 0) << shared.out;
  EXPECT_EQ(shared.summary()["config"]["sigma"], 0.3);

  std::ofstream(dir / "bad.toml") << "[vote]\nsigmaa = 0.5\n";
  EXPECT_EQ(fpt("vote" + vote_args() + " --config " + (dir / "bad.toml").string()).code, 2);
}

TEST(Cli, LossCheckPasses) {
  const CliRun r = fpt("loss-check --instances 5 --model-instances 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(r.summary()["result"]["passed"].get<bool>());
}

TEST(Cli, PretrainWritesArtifacts) {
  const fs::path dir = scratch("pretrain");
  const CliRun r = fpt("pretrain --steps 3 --hidden 8 --feature-dim 8 --embed-dim 4 --out " +
                    dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "loss.csv"));
  EXPECT_TRUE(fs::exists(dir / "checkpoint" / "checkpoint.fpt"));
  EXPECT_TRUE(fs::exists(dir / "checkpoint" / "checkpoint.json"));
  std::ifstream csv(dir / "loss.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "step,total,spatial,temporal,cross,d2s,missing");
  EXPECT_EQ(r.summary()["command"], "pretrain");
}

}  // namespace
