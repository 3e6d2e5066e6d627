#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "apmionet/cli/artifacts.hpp"
#include "apmionet/cli/commands.hpp"
#include "apmionet/training/trainer.hpp"

using namespace apmionet;
namespace fs = std::filesystem;

namespace {

const char* kConfig = R"([problem]
id = landau
epsilon = 1
[domain]
T = 0.2
[sampling]
fixed = true
sensors_x = 4
sensors_v = 4
n_dom = 32
n_init = 16
[optimizer]
iterations = 3
batch_dom = 8
batch_ic = 4
log_every = 1
[network]
hidden_layers = 2
width = 8
p = 8
[reference]
nx = 16
nv = 16
dt_out = 0.1
[runtime]
wall_clock = false
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("apmionet_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text = kConfig) {
  const auto p = (dir / "run.ini").string();
  std::ofstream(p) << text;
  return p;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "apmionet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(GitHash, KnownBlobs) {
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Cli, UsageErrors) {
  const auto dir = scratch("usage");
  EXPECT_EQ(cli({}), 1);
  EXPECT_EQ(cli({"frobnicate"}), 1);
  EXPECT_EQ(cli({"train", "--out", (dir / "o").string()}), 1);
  EXPECT_EQ(cli({"train", "--config", (dir / "missing.ini").string(), "--out", (dir / "o").string()}), 1);
  const auto bad = write_config(dir, "[problem]\nid = nowhere\n");
  EXPECT_EQ(cli({"generate", "--config", bad, "--out", (dir / "o").string()}), 1);
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, TrainZeroIterationsMatchesInitialization) {
  const auto dir = scratch("train0");
  const auto cfg_path = write_config(dir);
  const auto out = (dir / "out").string();
  ASSERT_EQ(cli({"train", "--config", cfg_path, "--out", out, "--iterations", "0", "--seed", "5"}), 0);
  auto cfg = load_config(cfg_path);
  cfg.seed = 5;
  const auto ds = sample_dataset(cfg, 5);
  EXPECT_EQ(load_checkpoint((dir / "out" / "checkpoint.bin").string()).params(), make_triple(cfg, ds).params());
}

TEST(Cli, TrainIsIdempotentAndManifested) {
  const auto dir = scratch("train");
  const auto cfg_path = write_config(dir);
  ASSERT_EQ(cli({"train", "--config", cfg_path, "--out", (dir / "a").string()}), 0);
  ASSERT_EQ(cli({"train", "--config", cfg_path, "--out", (dir / "b").string()}), 0);
  EXPECT_EQ(slurp(dir / "a" / "train_log.csv"), slurp(dir / "b" / "train_log.csv"));
  EXPECT_EQ(slurp(dir / "a" / "checkpoint.bin"), slurp(dir / "b" / "checkpoint.bin"));
  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["config_sha1"], git_blob_sha1(kConfig));
  std::vector<std::string> listed;
  for (const auto& a : m["artifacts"]) listed.push_back(a["file"]);
  EXPECT_NE(std::find(listed.begin(), listed.end(), "checkpoint.bin"), listed.end());
  EXPECT_NE(std::find(listed.begin(), listed.end(), "train_log.csv"), listed.end());
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      EXPECT_NE(std::find(listed.begin(), listed.end(), fs::relative(e.path(), dir / "a").generic_string()),
                listed.end());
    }
  }
}

TEST(Cli, DivergenceExitsTwoAndCleansUp) {
  const auto dir = scratch("diverge");
  std::string text = kConfig;
  text += "[weights]\nlambda1 = 1e12\n";
  const auto cfg_path = write_config(dir, text);
  fs::create_directories(dir / "out");
  std::ofstream(dir / "out" / "keep.txt") << "x";
  EXPECT_EQ(cli({"train", "--config", cfg_path, "--out", (dir / "out").string()}), 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "keep.txt"));
  EXPECT_FALSE(fs::exists(dir / "out" / "train_log.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Cli, ReferenceEvaluateExportPipeline) {
  const auto dir = scratch("pipeline");
  const auto cfg_path = write_config(dir);
  const auto ref = (dir / "ref").string();
  ASSERT_EQ(cli({"reference", "--config", cfg_path, "--out", ref}), 0);
  ASSERT_TRUE(fs::exists(dir / "ref" / "reference_000.csv"));
  EXPECT_EQ(slurp(dir / "ref" / "reference_000.csv").substr(0, 10), "t,x,rho,E\n");

  // a field against itself
  ASSERT_EQ(cli({"evaluate", "--config", cfg_path, "--out", (dir / "self").string(), "--prediction", ref,
                 "--reference", ref}),
            0);
  const auto self = slurp(dir / "self" / "metrics.csv");
  EXPECT_EQ(self.substr(0, self.find('\n')), "metric,value,problem,epsilon,n_test");
  EXPECT_NE(self.find("rel_l2_rho,0.0000000000e+00,landau,1,1"), std::string::npos);
  EXPECT_NE(self.find("rel_l2_E,0.0000000000e+00"), std::string::npos);
  EXPECT_NE(self.find("rel_l2_energy,0.0000000000e+00"), std::string::npos);

  ASSERT_EQ(cli({"train", "--config", cfg_path, "--out", (dir / "model").string()}), 0);
  const auto ckpt = (dir / "model" / "checkpoint.bin").string();
  ASSERT_EQ(cli({"evaluate", "--config", cfg_path, "--out", (dir / "eval").string(), "--checkpoint", ckpt,
                 "--reference", ref}),
            0);
  EXPECT_TRUE(fs::exists(dir / "eval" / "metrics.csv"));

  const auto field = (dir / "ref" / "reference_000.bin").string();
  ASSERT_EQ(cli({"export", "--config", cfg_path, "--out", (dir / "fig").string(), "--checkpoint", ckpt,
                 "--reference", field}),
            0);
  for (const char* f : {"density.csv", "field.csv", "energy.csv", "profile_final.csv", "density_ref.png",
                        "density_pred.png", "density_error.png", "energy.png", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "fig" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "fig" / "density_ref.png").substr(1, 3), "PNG");

  EXPECT_EQ(cli({"evaluate", "--config", cfg_path, "--out", (dir / "bad").string(), "--reference", ref}), 1);
}

TEST(Cli, GenerateThenTrainFromFile) {
  const auto dir = scratch("generate");
  const auto cfg_path = write_config(dir);
  ASSERT_EQ(cli({"generate", "--config", cfg_path, "--out", (dir / "d").string(), "--seed", "9"}), 0);
  const auto ds = load_dataset((dir / "d" / "dataset.bin").string());
  EXPECT_EQ(ds.train.size(), 1u);
  ASSERT_EQ(cli({"train", "--config", cfg_path, "--out", (dir / "m").string(), "--dataset",
                 (dir / "d" / "dataset.bin").string(), "--baseline-pi"}),
            0);
  EXPECT_FALSE(load_checkpoint((dir / "m" / "checkpoint.bin").string()).has(NetId::P));
}
