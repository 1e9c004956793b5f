#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sarslide/chipstore/splits.hpp"
#include "sarslide/chipstore/synthetic.hpp"
#include "sarslide/experiments/ablation.hpp"
#include "sarslide/nets/arch.hpp"
#include "sarslide/trainer/hyperparams.hpp"

namespace sarslide::cli {

inline constexpr const char* kOutputRootEnv = "SARSLIDE_OUTPUT_ROOT";

struct SplitOptions {
  chipstore::Fractions fractions = {0.75, 0.0, 0.125, 0.125};
  std::uint64_t seed = 0;
  bool balance = false;
  double positive_fraction = 0.5;
};

struct SegmentationOptions {
  std::optional<std::filesystem::path> pretrained;
  /// 0 trains on the whole segmentation-training split.
  int train_size = 0;
};

struct EvalOptions {
  /// Checkpoint files or directories holding checkpoint_* files.
  std::vector<std::filesystem::path> checkpoints;
  std::optional<std::filesystem::path> pretrained;
  std::string variant = "none";
};

/// Effective settings of one invocation: defaults, then the config file,
/// then command-line flags.
struct CliConfig {
  std::filesystem::path output_root = "runs";
  chipstore::SyntheticConfig synthetic;
  std::optional<std::filesystem::path> chips_dir;
  std::optional<std::filesystem::path> split_dir;
  SplitOptions split;
  nets::ArchConfig arch;
  trainer::Hyperparams hyper;
  std::optional<std::filesystem::path> pretrain_dir;
  std::optional<std::filesystem::path> segmentation_dir;
  SegmentationOptions segmentation;
  experiments::ExperimentConfig experiment;
  std::optional<std::filesystem::path> experiment_dir;
  EvalOptions eval;
  std::optional<std::filesystem::path> eval_dir;

  std::filesystem::path chips() const { return chips_dir.value_or(output_root / "chips"); }
  std::filesystem::path splits() const { return split_dir.value_or(output_root / "split"); }
  std::filesystem::path pretrain_out() const { return pretrain_dir.value_or(output_root / "pretrain"); }
  std::filesystem::path segmentation_out() const { return segmentation_dir.value_or(output_root / "segmentation"); }
  std::filesystem::path experiment_out() const { return experiment_dir.value_or(output_root / "ablation"); }
  std::filesystem::path eval_out() const { return eval_dir.value_or(output_root / "eval"); }

  /// Experiment settings with paths, arch and hyperparameters filled in.
  experiments::ExperimentConfig experiment_config() const;
};

/// Defaults with the output root taken from SARSLIDE_OUTPUT_ROOT when set.
CliConfig default_config();

/// Applies a config document on top of `cfg`. Unknown keys are a ConfigError.
void apply_config_json(const nlohmann::json& j, CliConfig& cfg);
CliConfig load_config(const std::filesystem::path& path);

/// Complete effective configuration; feeding it back through
/// apply_config_json reproduces `cfg`.
nlohmann::json config_json(const CliConfig& cfg);

}  // namespace sarslide::cli
