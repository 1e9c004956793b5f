#include "sarslide/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>

#include "sarslide/chipstore/chip_io.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/experiments/ablation.hpp"
#include "sarslide/experiments/evaluate.hpp"
#include "sarslide/experiments/report.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/trainer/train.hpp"

namespace sarslide::cli {

namespace fs = std::filesystem;
using chipstore::Role;
using nlohmann::json;

namespace {

void write_provenance(const fs::path& dir, const CliConfig& cfg, const std::string& command) {
  const json effective = config_json(cfg);
  const json p = {{"command", command},
                  {"config", effective},
                  {"config_sha256", sha256_hex(effective.dump())},
                  {"code_version", experiments::code_version()}};
  write_text_file(dir / "provenance.json", p.dump(2) + "\n");
}

struct SplitData {
  chipstore::ChipSet chips;
  chipstore::SplitManifest manifest;
  chipstore::NormStats stats;
};

SplitData load_split_data(const CliConfig& cfg) {
  SplitData d;
  d.chips = chipstore::read_chipset(cfg.chips());
  d.manifest = chipstore::read_manifest(cfg.splits());
  d.stats = experiments::training_norm_stats(d.chips, d.manifest);
  return d;
}

std::vector<chipstore::Sample> role_samples(const SplitData& d, Role role) {
  return chipstore::normalize_chipset(chipstore::select_role(d.chips, d.manifest, role), d.stats);
}

json save_checkpoints(const trainer::TrainResult& result, const chipstore::NormStats& stats, const fs::path& dir) {
  json kept = json::array();
  for (std::size_t r = 0; r < result.checkpoints.size(); ++r) {
    trainer::Checkpoint cp = result.checkpoints[r];
    cp.norm = stats;
    const std::string stem = "checkpoint_" + std::to_string(r);
    trainer::save_checkpoint(cp, dir / stem);
    kept.push_back({{"file", stem}, {"epoch", cp.epoch}, {"val_metric", cp.val_metric}});
  }
  return kept;
}

std::vector<fs::path> expand_checkpoints(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("checkpoint_", 0) == 0 && e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  if (out.empty()) throw ConfigError("eval: no checkpoints given");
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

void cmd_synth(const CliConfig& cfg, bool force, std::ostream& out) {
  cfg.synthetic.validate();
  const fs::path dir = cfg.chips();
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw ConfigError("output directory " + dir.string() + " is not empty (use --force)");
    fs::remove_all(dir);
  }
  const chipstore::ChipSet set = chipstore::generate_synthetic_chipset(cfg.synthetic);
  chipstore::write_chipset(set, dir, chipstore::to_json(cfg.synthetic));
  out << "wrote " << set.chips.size() << " chips (" << set.positives() << " with landslides) to " << dir.string()
      << "\n";
}

void cmd_split(const CliConfig& cfg, std::ostream& out) {
  chipstore::ChipSet chips = chipstore::read_chipset(cfg.chips());
  if (!chipstore::is_balanced(chips.positives(), chips.chips.size(), cfg.split.positive_fraction)) {
    if (!cfg.split.balance) {
      throw DataError("input has " + std::to_string(chips.positives()) + " positives among " +
                      std::to_string(chips.chips.size()) + " chips; rerun with --balance");
    }
    chips = chipstore::balance_chipset(chips, cfg.split.positive_fraction, cfg.split.seed);
  }
  const chipstore::SplitManifest manifest = chipstore::split_chipset(chips, cfg.split.fractions, cfg.split.seed);
  std::vector<std::string> order;
  for (const auto& c : chips.chips) order.push_back(c.chip_id);
  chipstore::write_manifest(manifest, order, cfg.splits());
  const auto counts = manifest.counts();
  out << "split " << chips.chips.size() << " chips:";
  for (Role r : chipstore::kRoles) out << " " << chipstore::role_name(r) << "=" << counts[static_cast<int>(r)];
  out << "\n";
}

void cmd_pretrain(const CliConfig& cfg, std::ostream& out) {
  const SplitData d = load_split_data(cfg);
  const auto train = role_samples(d, Role::pretrain);
  const auto val = role_samples(d, Role::validation);
  const trainer::TrainResult result = trainer::train_stage1(train, val, cfg.arch, cfg.hyper);
  const fs::path dir = cfg.pretrain_out();
  fs::create_directories(dir);
  const json kept = save_checkpoints(result, d.stats, dir);
  json log = trainer::train_log_json(result);
  log["saved"] = kept;
  write_text_file(dir / "train_log.json", log.dump(2) + "\n");
  write_provenance(dir, cfg, "pretrain");
  out << "pretrain: " << result.log.size() << " epochs, best validation accuracy "
      << result.checkpoints.front().val_metric << ", " << kept.size() << " checkpoints in " << dir.string() << "\n";
}

void cmd_trainseg(const CliConfig& cfg, std::ostream& out) {
  const SplitData d = load_split_data(cfg);
  auto train = role_samples(d, Role::seg_train);
  const auto val = role_samples(d, Role::validation);
  json ids = json::array();
  if (cfg.segmentation.train_size > 0) {
    std::vector<chipstore::Sample> subset;
    for (std::size_t i : experiments::subsample_indices(train.size(), static_cast<std::size_t>(cfg.segmentation.train_size),
                                                        cfg.hyper.seed)) {
      subset.push_back(train[i]);
    }
    train = std::move(subset);
  }
  for (const auto& s : train) ids.push_back(s.chip_id);
  std::optional<trainer::Checkpoint> pretrained;
  if (cfg.segmentation.pretrained) pretrained = trainer::load_checkpoint(*cfg.segmentation.pretrained, 1);
  const trainer::TrainResult result =
      trainer::train_stage2(train, val, pretrained ? &*pretrained : nullptr, cfg.arch, cfg.hyper);
  const fs::path dir = cfg.segmentation_out();
  fs::create_directories(dir);
  const json kept = save_checkpoints(result, d.stats, dir);
  json log = trainer::train_log_json(result);
  log["saved"] = kept;
  log["training_chip_ids"] = ids;
  write_text_file(dir / "train_log.json", log.dump(2) + "\n");
  write_provenance(dir, cfg, "train-seg");
  out << "train-seg: " << result.log.size() << " epochs, best validation APRC " << result.checkpoints.front().val_metric
      << ", " << kept.size() << " checkpoints in " << dir.string() << "\n";
}

void cmd_ablate(const CliConfig& cfg, std::ostream& out) {
  const experiments::ExperimentConfig e = cfg.experiment_config();
  const experiments::ResultsTable table = experiments::run_ablation(e);
  const auto files = experiments::emit_report(table, e.output_dir, config_json(cfg));
  for (const auto& r : table.rows) {
    out << r.variant << " size=" << r.train_size << " checkpoints=" << r.checkpoints;
    if (r.metrics) {
      out << " aprc=" << r.metrics->aprc << " median_dl1=" << r.metrics->median_dl1_all;
    } else {
      out << " incomplete (" << r.note << ")";
    }
    out << "\n";
  }
  out << "results: " << files.csv.string() << "\n";
  if (!table.complete()) throw TrainingError("ablation finished with incomplete cells");
}

void cmd_eval(const CliConfig& cfg, std::ostream& out) {
  const SplitData d = load_split_data(cfg);
  const auto test = role_samples(d, Role::test);
  std::set<std::string> training_ids;
  for (const auto& [id, role] : d.manifest.assignments) {
    if (role != Role::test) training_ids.insert(id);
  }
  std::vector<experiments::Member> members;
  for (const auto& path : expand_checkpoints(cfg.eval.checkpoints)) {
    members.push_back({path.string(), trainer::load_checkpoint(path, 2)});
  }
  std::unique_ptr<trainer::EmbeddingProvider> provider;
  if (cfg.eval.pretrained) {
    provider = std::make_unique<trainer::EmbeddingProvider>(trainer::load_checkpoint(*cfg.eval.pretrained, 1));
  }
  const auto suite = experiments::evaluate_suite(members, test, cfg.eval.variant, training_ids, provider.get());
  const metrics::MetricsReport report = metrics::aggregate(suite.inputs);
  const fs::path dir = cfg.eval_out();
  fs::create_directories(dir);
  write_text_file(dir / "metrics.json", metrics::to_json(report).dump(2) + "\n");
  write_text_file(dir / "counts.csv", metrics::count_table_csv(report.chips));
  write_provenance(dir, cfg, "eval");
  out << "eval: " << members.size() << " checkpoints, " << test.size() << " test chips, APRC " << report.aprc
      << " (random " << report.aprc_random_baseline << "), median dL1 " << report.median_dl1_all << "\n";
}

void cmd_report(const CliConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.experiment_out();
  const fs::path csv = dir / "results.csv";
  if (!fs::exists(csv)) throw DataError("no results.csv in " + dir.string());
  const auto table = experiments::parse_results_csv(read_text_file(csv));
  const auto files = experiments::emit_report(table, dir, config_json(cfg));
  out << "report: " << files.plots.size() << " plots in " << (dir / "report").string() << "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage SAR landslide segmentation pipeline", "sarslide"};
  app.set_version_flag("--version", std::string(experiments::code_version()));
  app.require_subcommand(1);

  std::optional<std::string> config_path, output_root;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--output-root", output_root, "Default root for all outputs (env SARSLIDE_OUTPUT_ROOT)");

  std::optional<std::string> chips, split_dir, out_dir, pretrained, pretrained_a, pretrained_b, in_dir, variant;
  std::optional<int> n_chips, looks, chip_size, max_epochs, batch_size, patience, top_k, train_size, jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> contrast, positive_fraction, width_scale, learning_rate;
  std::vector<double> fractions;
  std::vector<int> sizes;
  std::vector<std::string> variants, checkpoints;
  bool force = false, balance = false;

  auto add_data = [&](CLI::App* c) {
    c->add_option("--chips", chips, "Chip directory");
    c->add_option("--split", split_dir, "Split manifest directory");
  };
  auto add_training = [&](CLI::App* c) {
    c->add_option("--seed", seed, "Training seed");
    c->add_option("--max-epochs", max_epochs, "Maximum epochs");
    c->add_option("--batch-size", batch_size, "Batch size");
    c->add_option("--patience", patience, "Early-stopping patience in epochs");
    c->add_option("--top-k", top_k, "Checkpoints kept per run");
    c->add_option("--learning-rate", learning_rate, "Adam learning rate");
    c->add_option("--width-scale", width_scale, "Channel width multiplier");
    c->add_option("--chip-size", chip_size, "Chip edge length in pixels");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic chip set");
  synth->add_option("--out", out_dir, "Chip directory to write");
  synth->add_option("--n-chips", n_chips, "Number of chips");
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--looks", looks, "Speckle looks");
  synth->add_option("--contrast", contrast, "Post/pre amplitude ratio inside landslides");
  synth->add_option("--positive-fraction", positive_fraction, "Fraction of chips with landslides");
  synth->add_option("--chip-size", chip_size, "Chip edge length in pixels");
  synth->add_flag("--force", force, "Overwrite a non-empty output directory");

  auto* split = app.add_subcommand("split", "Balance and split a chip set into roles");
  split->add_option("--chips", chips, "Chip directory");
  split->add_option("--out", out_dir, "Manifest directory to write");
  split->add_option("--fractions", fractions, "pretrain seg_train validation test fractions")->expected(4);
  split->add_option("--seed", seed, "Split seed");
  split->add_flag("--balance", balance, "Discard chips to balance the classes first");

  auto* pretrain = app.add_subcommand("pretrain", "Train the stage-1 chip classifier");
  add_data(pretrain);
  add_training(pretrain);
  pretrain->add_option("--out", out_dir, "Checkpoint directory");

  auto* trainseg = app.add_subcommand("train-seg", "Train the stage-2 segmenter");
  add_data(trainseg);
  add_training(trainseg);
  trainseg->add_option("--out", out_dir, "Checkpoint directory");
  trainseg->add_option("--pretrained", pretrained, "Stage-1 checkpoint providing frozen embeddings");
  trainseg->add_option("--train-size", train_size, "Subsample this many training chips (0 = all)");

  auto* ablate = app.add_subcommand("ablate", "Run the training-size ablation");
  add_data(ablate);
  add_training(ablate);
  ablate->add_option("--out", out_dir, "Experiment directory");
  ablate->add_option("--sizes", sizes, "Training-set sizes");
  ablate->add_option("--variants", variants, "Variants: none pretrain_A pretrain_B");
  ablate->add_option("--pretrained-a", pretrained_a, "Stage-1 checkpoint for pretrain_A");
  ablate->add_option("--pretrained-b", pretrained_b, "Stage-1 checkpoint for pretrain_B");
  ablate->add_option("--jobs", jobs, "Runs trained in parallel");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint ensemble on the test split");
  add_data(eval);
  eval->add_option("--checkpoint", checkpoints, "Checkpoint file or directory (repeatable)");
  eval->add_option("--pretrained", pretrained, "Stage-1 checkpoint for pretrained members");
  eval->add_option("--variant", variant, "Variant label");
  eval->add_option("--out", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Redraw plots and provenance from results.csv");
  report->add_option("--in", in_dir, "Experiment directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: code=CONFIG message=" << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorKind::config);
  }

  try {
    CliConfig cfg = config_path ? load_config(*config_path) : default_config();
    if (output_root) cfg.output_root = *output_root;
    if (chips) cfg.chips_dir = fs::path(*chips);
    if (split_dir) cfg.split_dir = fs::path(*split_dir);
    if (seed) cfg.hyper.seed = *seed;
    if (max_epochs) cfg.hyper.max_epochs = *max_epochs;
    if (batch_size) cfg.hyper.batch_size = *batch_size;
    if (patience) cfg.hyper.patience_epochs = *patience;
    if (top_k) cfg.hyper.top_k_checkpoints = *top_k;
    if (learning_rate) cfg.hyper.learning_rate = *learning_rate;
    if (width_scale) cfg.arch.width_scale = *width_scale;
    if (chip_size) cfg.arch.chip_size = *chip_size;

    if (*synth) {
      if (out_dir) cfg.chips_dir = fs::path(*out_dir);
      if (n_chips) cfg.synthetic.n_chips = *n_chips;
      if (seed) cfg.synthetic.seed = *seed;
      if (looks) cfg.synthetic.looks = *looks;
      if (contrast) cfg.synthetic.contrast = *contrast;
      if (positive_fraction) cfg.synthetic.positive_fraction = *positive_fraction;
      if (chip_size) cfg.synthetic.chip_size = *chip_size;
      cmd_synth(cfg, force, out);
    } else if (*split) {
      if (out_dir) cfg.split_dir = fs::path(*out_dir);
      if (!fractions.empty()) std::copy(fractions.begin(), fractions.end(), cfg.split.fractions.begin());
      if (seed) cfg.split.seed = *seed;
      if (balance) cfg.split.balance = true;
      cmd_split(cfg, out);
    } else {
      cfg.hyper.validate();
      cfg.arch.validate();
      if (*pretrain) {
        if (out_dir) cfg.pretrain_dir = fs::path(*out_dir);
        cmd_pretrain(cfg, out);
      } else if (*trainseg) {
        if (out_dir) cfg.segmentation_dir = fs::path(*out_dir);
        if (pretrained) cfg.segmentation.pretrained = fs::path(*pretrained);
        if (train_size) cfg.segmentation.train_size = *train_size;
        cmd_trainseg(cfg, out);
      } else if (*ablate) {
        if (out_dir) cfg.experiment_dir = fs::path(*out_dir);
        if (!sizes.empty()) cfg.experiment.train_sizes = sizes;
        if (!variants.empty()) cfg.experiment.variants = variants;
        if (pretrained_a) cfg.experiment.pretrained["pretrain_A"] = *pretrained_a;
        if (pretrained_b) cfg.experiment.pretrained["pretrain_B"] = *pretrained_b;
        if (jobs) cfg.experiment.jobs = *jobs;
        cmd_ablate(cfg, out);
      } else if (*eval) {
        if (out_dir) cfg.eval_dir = fs::path(*out_dir);
        if (!checkpoints.empty()) cfg.eval.checkpoints.assign(checkpoints.begin(), checkpoints.end());
        if (pretrained) cfg.eval.pretrained = fs::path(*pretrained);
        if (variant) cfg.eval.variant = *variant;
        cmd_eval(cfg, out);
      } else if (*report) {
        if (in_dir) cfg.experiment_dir = fs::path(*in_dir);
        cmd_report(cfg, out);
      }
    }
  } catch (const Error& e) {
    err << "error: code=" << error_code_name(e.kind()) << " message=" << one_line(e.what()) << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: code=DATA message=" << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}

}  // namespace sarslide::cli
