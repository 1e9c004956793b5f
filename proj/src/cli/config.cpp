#include "sarslide/cli/config.hpp"

#include <cstdlib>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/json_util.hpp"

namespace sarslide::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void read_path(const json& j, const char* key, std::optional<fs::path>& out, const std::string& ctx) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  if (!j.at(key).is_string()) throw ConfigError(ctx + ": key '" + key + "' must be a path string");
  out = fs::path(j.at(key).get<std::string>());
}

json path_json(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

/// Section values override the current ones key by key.
json merged(json current, const json& section, const std::string& ctx) {
  if (!section.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  current.update(section);
  return current;
}

}  // namespace

experiments::ExperimentConfig CliConfig::experiment_config() const {
  experiments::ExperimentConfig e = experiment;
  e.arch = arch;
  e.hyper = hyper;
  e.chips_dir = chips();
  e.split_dir = splits();
  e.output_dir = experiment_out();
  return e;
}

CliConfig default_config() {
  CliConfig cfg;
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') cfg.output_root = root;
  return cfg;
}

void apply_config_json(const json& j, CliConfig& cfg) {
  require_known_keys(j,
                     {"output_root", "synthetic", "data", "split", "arch", "hyper", "pretrain", "segmentation",
                      "experiment", "eval"},
                     "config");
  std::optional<fs::path> root;
  read_path(j, "output_root", root, "config");
  if (root) cfg.output_root = *root;

  if (j.contains("synthetic")) {
    cfg.synthetic = chipstore::synthetic_config_from_json(merged(chipstore::to_json(cfg.synthetic), j.at("synthetic"), "synthetic"));
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    require_known_keys(d, {"chips_dir", "split_dir"}, "data");
    read_path(d, "chips_dir", cfg.chips_dir, "data");
    read_path(d, "split_dir", cfg.split_dir, "data");
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    require_known_keys(s, {"fractions", "seed", "balance", "positive_fraction"}, "split");
    read_optional(s, "fractions", cfg.split.fractions, "split");
    read_optional(s, "seed", cfg.split.seed, "split");
    read_optional(s, "balance", cfg.split.balance, "split");
    read_optional(s, "positive_fraction", cfg.split.positive_fraction, "split");
  }
  if (j.contains("arch")) cfg.arch = nets::arch_from_json(merged(nets::to_json(cfg.arch), j.at("arch"), "arch"));
  if (j.contains("hyper")) {
    cfg.hyper = trainer::hyperparams_from_json(merged(trainer::to_json(cfg.hyper), j.at("hyper"), "hyper"));
  }
  if (j.contains("pretrain")) {
    const json& p = j.at("pretrain");
    require_known_keys(p, {"output_dir"}, "pretrain");
    read_path(p, "output_dir", cfg.pretrain_dir, "pretrain");
  }
  if (j.contains("segmentation")) {
    const json& s = j.at("segmentation");
    require_known_keys(s, {"output_dir", "pretrained", "train_size"}, "segmentation");
    read_path(s, "output_dir", cfg.segmentation_dir, "segmentation");
    read_path(s, "pretrained", cfg.segmentation.pretrained, "segmentation");
    read_optional(s, "train_size", cfg.segmentation.train_size, "segmentation");
    if (cfg.segmentation.train_size < 0) throw ConfigError("segmentation: train_size must be nonnegative");
  }
  if (j.contains("experiment")) {
    json e = j.at("experiment");
    if (!e.is_object()) throw ConfigError("experiment: expected a JSON object");
    std::optional<fs::path> out;
    read_path(e, "output_dir", out, "experiment");
    if (out) cfg.experiment_dir = out;
    e.erase("output_dir");
    experiments::apply_experiment_json(e, cfg.experiment);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    require_known_keys(e, {"output_dir", "checkpoints", "pretrained", "variant"}, "eval");
    read_path(e, "output_dir", cfg.eval_dir, "eval");
    read_path(e, "pretrained", cfg.eval.pretrained, "eval");
    read_optional(e, "variant", cfg.eval.variant, "eval");
    if (e.contains("checkpoints")) {
      std::vector<std::string> cps;
      read_optional(e, "checkpoints", cps, "eval");
      cfg.eval.checkpoints.assign(cps.begin(), cps.end());
    }
  }
}

CliConfig load_config(const fs::path& path) {
  CliConfig cfg = default_config();
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": malformed JSON: " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_config_json(j, cfg);
  return cfg;
}

json config_json(const CliConfig& cfg) {
  json experiment = experiments::experiment_json(cfg.experiment);
  experiment["output_dir"] = path_json(cfg.experiment_dir);
  json checkpoints = json::array();
  for (const auto& p : cfg.eval.checkpoints) checkpoints.push_back(p.string());
  return {
      {"output_root", cfg.output_root.string()},
      {"synthetic", chipstore::to_json(cfg.synthetic)},
      {"data", {{"chips_dir", path_json(cfg.chips_dir)}, {"split_dir", path_json(cfg.split_dir)}}},
      {"split",
       {{"fractions", cfg.split.fractions},
        {"seed", cfg.split.seed},
        {"balance", cfg.split.balance},
        {"positive_fraction", cfg.split.positive_fraction}}},
      {"arch", nets::to_json(cfg.arch)},
      {"hyper", trainer::to_json(cfg.hyper)},
      {"pretrain", {{"output_dir", path_json(cfg.pretrain_dir)}}},
      {"segmentation",
       {{"output_dir", path_json(cfg.segmentation_dir)},
        {"pretrained", path_json(cfg.segmentation.pretrained)},
        {"train_size", cfg.segmentation.train_size}}},
      {"experiment", experiment},
      {"eval",
       {{"output_dir", path_json(cfg.eval_dir)},
        {"checkpoints", checkpoints},
        {"pretrained", path_json(cfg.eval.pretrained)},
        {"variant", cfg.eval.variant}}},
  };
}

}  // namespace sarslide::cli
