#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "sarslide/chipstore/chip_io.hpp"
#include "sarslide/chipstore/splits.hpp"
#include "sarslide/cli/commands.hpp"
#include "sarslide/cli/config.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "test_util.hpp"

using namespace sarslide;
using namespace sarslide::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run_cli(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<std::string> synth_args(const testing_util::TempDir& dir, int n, double fraction = 0.5) {
  return {"--output-root", dir.path().string(), "synth", "--n-chips", std::to_string(n), "--chip-size", "32",
          "--positive-fraction", std::to_string(fraction), "--seed", "3"};
}

}  // namespace

TEST(Cli, SynthWritesChipsAndRefusesOverwrite) {
  testing_util::TempDir dir;
  const Outcome a = run(synth_args(dir, 12));
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(chipstore::read_chipset(dir / "chips").size(), 12u);
  const Outcome b = run(synth_args(dir, 12));
  EXPECT_EQ(b.code, 2);
  EXPECT_EQ(b.err.rfind("error: code=CONFIG message=", 0), 0u) << b.err;
  EXPECT_EQ(std::count(b.err.begin(), b.err.end(), '\n'), 1);
  auto forced = synth_args(dir, 8);
  forced.push_back("--force");
  EXPECT_EQ(run(forced).code, 0);
  EXPECT_EQ(chipstore::read_chipset(dir / "chips").size(), 8u);
}

TEST(Cli, SplitCountsFollowFractions) {
  testing_util::TempDir dir;
  ASSERT_EQ(run(synth_args(dir, 40)).code, 0);
  const Outcome o = run({"--output-root", dir.path().string(), "split", "--fractions", "0.5", "0.25", "0.125", "0.125"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("pretrain=20 seg_train=10 validation=5 test=5"), std::string::npos) << o.out;
  EXPECT_EQ(chipstore::read_manifest(dir / "split").counts(), (std::array<std::size_t, 4>{20, 10, 5, 5}));
}

TEST(Cli, SplitErrors) {
  testing_util::TempDir dir;
  ASSERT_EQ(run(synth_args(dir, 40, 0.2)).code, 0);
  const std::string root = dir.path().string();
  EXPECT_EQ(run({"--output-root", root, "split", "--balance", "--fractions", "0.5", "0.5", "0.5", "0.5"}).code, 2);
  const Outcome unbalanced = run({"--output-root", root, "split"});
  EXPECT_EQ(unbalanced.code, 3);
  EXPECT_NE(unbalanced.err.find("code=DATA"), std::string::npos);
  const Outcome balanced = run({"--output-root", root, "split", "--balance"});
  ASSERT_EQ(balanced.code, 0) << balanced.err;
  EXPECT_NE(balanced.out.find("split 16 chips"), std::string::npos) << balanced.out;
}

TEST(Cli, MissingInputsAreDataErrors) {
  testing_util::TempDir dir;
  EXPECT_EQ(run({"--output-root", dir.path().string(), "split"}).code, 3);
  EXPECT_EQ(run({"--output-root", dir.path().string(), "report"}).code, 3);
}

TEST(Cli, ConfigFileStrictness) {
  testing_util::TempDir dir;
  write_text_file(dir / "bad.json", R"({"hyper": {"learning_rte": 0.1}})");
  const Outcome o = run({"--config", (dir / "bad.json").string(), "synth"});
  EXPECT_EQ(o.code, 2);
  write_text_file(dir / "broken.json", "{");
  EXPECT_EQ(run({"--config", (dir / "broken.json").string(), "synth"}).code, 2);
  EXPECT_EQ(run({"--config", (dir / "none.json").string(), "synth"}).code, 2);
}

TEST(Cli, ConfigRoundTrip) {
  CliConfig c = default_config();
  apply_config_json({{"hyper", {{"max_epochs", 70}}}, {"arch", {{"width_scale", 0.5}}}}, c);
  EXPECT_EQ(c.hyper.max_epochs, 70);
  EXPECT_DOUBLE_EQ(c.arch.width_scale, 0.5);
  CliConfig d = default_config();
  apply_config_json(config_json(c), d);
  EXPECT_EQ(config_json(d), config_json(c));
  EXPECT_THROW(apply_config_json({{"unknown_section", 1}}, d), ConfigError);
}

TEST(Cli, UsageErrorsAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"synth", "--n-chips", "many"}).code, 2);
  const Outcome help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* cmd : {"synth", "split", "pretrain", "train-seg", "ablate", "eval", "report"}) {
    EXPECT_NE(help.out.find(cmd), std::string::npos) << cmd;
  }
  const Outcome sub = run({"ablate", "--help"});
  EXPECT_EQ(sub.code, 0);
  EXPECT_NE(sub.out.find("--sizes"), std::string::npos);
  EXPECT_EQ(run({"--version"}).code, 0);
}

TEST(Cli, BinaryExitCodes) {
  testing_util::TempDir dir;
  const std::string bin = SARSLIDE_BINARY;
  auto status = [&](const std::string& args) {
    const int rc = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("--output-root " + dir.path().string() + " split"), 3);
  EXPECT_EQ(status("--output-root " + dir.path().string() + " synth --looks 0"), 2);
}
