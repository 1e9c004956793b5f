#include "sarslide/experiments/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "sarslide/chipstore/chip_io.hpp"
#include "sarslide/errors.hpp"
#include "sarslide/experiments/evaluate.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/json_util.hpp"
#include "sarslide/trainer/train.hpp"

namespace sarslide::experiments {

namespace fs = std::filesystem;
using chipstore::Role;
using chipstore::Sample;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSubsampleStream = 7;
constexpr const char* kDoneMarker = "done.marker";
constexpr const char* kCellReport = "report.json";

}  // namespace

int ExperimentConfig::seed_count(int train_size) const {
  if (auto it = seeds_per_size.find(train_size); it != seeds_per_size.end()) return it->second;
  return train_size == 2 ? 5 : 3;
}

std::vector<std::uint64_t> ExperimentConfig::seeds(int train_size) const {
  std::vector<std::uint64_t> out;
  for (int rep = 0; rep < seed_count(train_size); ++rep) {
    out.push_back(base_seed + 1000ULL * static_cast<std::uint64_t>(train_size) + static_cast<std::uint64_t>(rep));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (train_sizes.empty()) throw ConfigError("experiment: train_sizes is empty");
  std::set<int> sizes;
  for (int s : train_sizes) {
    if (s <= 0) throw ConfigError("experiment: train sizes must be positive");
    if (!sizes.insert(s).second) throw ConfigError("experiment: duplicate train size " + std::to_string(s));
  }
  for (const auto& [size, n] : seeds_per_size) {
    if (n < 1 || n >= 1000) throw ConfigError("experiment: seeds per size must lie in [1, 999]");
  }
  if (variants.empty()) throw ConfigError("experiment: no variants");
  std::set<std::string> seen;
  for (const auto& v : variants) {
    if (std::find(kVariants.begin(), kVariants.end(), v) == kVariants.end()) {
      throw ConfigError("experiment: unknown variant '" + v + "'");
    }
    if (!seen.insert(v).second) throw ConfigError("experiment: duplicate variant " + v);
    if (v != "none" && !pretrained.count(v)) throw ConfigError("experiment: no pretrained checkpoint for " + v);
  }
  if (jobs < 1) throw ConfigError("experiment: jobs must be at least 1");
  if (output_dir.empty()) throw ConfigError("experiment: output directory not set");
  hyper.validate();
  arch.validate();
}

void apply_experiment_json(const json& j, ExperimentConfig& cfg) {
  const std::string ctx = "experiment";
  require_known_keys(j, {"train_sizes", "seeds_per_size", "variants", "pretrained", "base_seed", "jobs"}, ctx);
  read_optional(j, "train_sizes", cfg.train_sizes, ctx);
  read_optional(j, "variants", cfg.variants, ctx);
  read_optional(j, "base_seed", cfg.base_seed, ctx);
  read_optional(j, "jobs", cfg.jobs, ctx);
  if (j.contains("seeds_per_size")) {
    if (!j.at("seeds_per_size").is_object()) throw ConfigError("experiment: seeds_per_size must be an object");
    cfg.seeds_per_size.clear();
    for (const auto& [key, value] : j.at("seeds_per_size").items()) {
      try {
        std::size_t used = 0;
        const int size = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
        cfg.seeds_per_size[size] = value.get<int>();
      } catch (const std::exception&) {
        throw ConfigError("experiment: bad seeds_per_size entry '" + key + "'");
      }
    }
  }
  if (j.contains("pretrained")) {
    if (!j.at("pretrained").is_object()) throw ConfigError("experiment: pretrained must be an object");
    cfg.pretrained.clear();
    for (const auto& [key, value] : j.at("pretrained").items()) {
      if (!value.is_string()) throw ConfigError("experiment: pretrained paths must be strings");
      cfg.pretrained[key] = value.get<std::string>();
    }
  }
}

json experiment_json(const ExperimentConfig& cfg) {
  json seeds = json::object();
  for (int s : cfg.train_sizes) seeds[std::to_string(s)] = cfg.seed_count(s);
  json pretrained = json::object();
  for (const auto& [k, v] : cfg.pretrained) pretrained[k] = v.string();
  return {
      {"train_sizes", cfg.train_sizes}, {"seeds_per_size", seeds},   {"variants", cfg.variants},
      {"pretrained", pretrained},       {"base_seed", cfg.base_seed}, {"jobs", cfg.jobs},
  };
}

std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > population) {
    throw ConfigError("cannot draw " + std::to_string(n) + " chips from a split of " + std::to_string(population));
  }
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, kSubsampleStream));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

chipstore::ChipSet subsample_training_set(const chipstore::ChipSet& split, std::size_t n, std::uint64_t seed) {
  chipstore::ChipSet out;
  out.provenance = split.provenance;
  out.pixel_spacing_m = split.pixel_spacing_m;
  for (std::size_t i : subsample_indices(split.chips.size(), n, seed)) out.chips.push_back(split.chips[i]);
  return out;
}

chipstore::NormStats training_norm_stats(const chipstore::ChipSet& chips, const chipstore::SplitManifest& manifest) {
  chipstore::ChipSet train = chipstore::select_role(chips, manifest, Role::pretrain);
  for (auto& c : chipstore::select_role(chips, manifest, Role::seg_train).chips) train.chips.push_back(std::move(c));
  if (train.chips.empty()) throw DataError("no pretrain or segmentation-training chips to normalize with");
  return chipstore::compute_norm_stats(train);
}

namespace {

struct Dataset {
  chipstore::NormStats stats;
  std::vector<Sample> seg_train;
  std::vector<Sample> val;
  std::vector<Sample> test;
  std::set<std::string> pretrain_ids;
};

Dataset load_dataset(const ExperimentConfig& cfg) {
  const chipstore::ChipSet chips = chipstore::read_chipset(cfg.chips_dir);
  const chipstore::SplitManifest manifest = chipstore::read_manifest(cfg.split_dir);
  Dataset d;
  d.stats = training_norm_stats(chips, manifest);
  d.seg_train = chipstore::normalize_chipset(chipstore::select_role(chips, manifest, Role::seg_train), d.stats);
  d.val = chipstore::normalize_chipset(chipstore::select_role(chips, manifest, Role::validation), d.stats);
  d.test = chipstore::normalize_chipset(chipstore::select_role(chips, manifest, Role::test), d.stats);
  for (const auto& id : manifest.ids_with_role(Role::pretrain)) d.pretrain_ids.insert(id);
  if (d.test.empty()) throw DataError("test split is empty");
  for (int s : cfg.train_sizes) {
    if (static_cast<std::size_t>(s) > d.seg_train.size()) {
      throw ConfigError("train size " + std::to_string(s) + " exceeds the segmentation training split (" +
                        std::to_string(d.seg_train.size()) + " chips)");
    }
  }
  return d;
}

struct Pretrained {
  trainer::Checkpoint checkpoint;
  std::unique_ptr<trainer::EmbeddingProvider> provider;
};

struct Job {
  std::string variant;
  int size = 0;
  std::uint64_t seed = 0;
};

fs::path cell_dir(const ExperimentConfig& cfg, const std::string& variant, int size) {
  return cfg.output_dir / variant / std::to_string(size);
}

fs::path run_dir(const ExperimentConfig& cfg, const std::string& variant, int size, std::uint64_t seed) {
  return cell_dir(cfg, variant, size) / std::to_string(seed);
}

std::vector<fs::path> checkpoint_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("checkpoint_", 0) == 0 && e.path().extension() == ".bin") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void run_job(const ExperimentConfig& cfg, const Dataset& data, const Job& job, Pretrained* pre) {
  const fs::path dir = run_dir(cfg, job.variant, job.size, job.seed);
  if (fs::exists(dir / kDoneMarker)) return;
  fs::create_directories(dir);
  fs::remove(dir / "error.json");
  for (const auto& f : checkpoint_files(dir)) {
    fs::remove(f);
    fs::remove(fs::path(f).replace_extension(".json"));
  }

  std::vector<Sample> subset;
  json ids = json::array();
  for (std::size_t i : subsample_indices(data.seg_train.size(), static_cast<std::size_t>(job.size), job.seed)) {
    subset.push_back(data.seg_train[i]);
    ids.push_back(data.seg_train[i].chip_id);
  }
  trainer::Hyperparams hyper = cfg.hyper;
  hyper.seed = job.seed;
  const trainer::TrainResult result =
      trainer::train_stage2(subset, data.val, pre ? &pre->checkpoint : nullptr, cfg.arch, hyper,
                            pre ? pre->provider.get() : nullptr);

  json kept = json::array();
  for (std::size_t r = 0; r < result.checkpoints.size(); ++r) {
    trainer::Checkpoint cp = result.checkpoints[r];
    cp.norm = data.stats;
    const std::string stem = "checkpoint_" + std::to_string(r);
    trainer::save_checkpoint(cp, dir / stem);
    kept.push_back({{"file", stem}, {"epoch", cp.epoch}, {"val_metric", cp.val_metric}});
  }
  const json metrics = {
      {"variant", job.variant},
      {"train_size", job.size},
      {"seed", job.seed},
      {"training_chip_ids", ids},
      {"checkpoints", kept},
      {"log", trainer::train_log_json(result)},
  };
  write_text_file(dir / "metrics.json", metrics.dump(2) + "\n");
  write_text_file(dir / kDoneMarker, "done\n");
}

std::vector<Member> load_members(const fs::path& dir, const std::string& run_prefix,
                                 std::set<std::string>& training_ids) {
  json metrics;
  try {
    metrics = json::parse(read_text_file(dir / "metrics.json"));
    for (const auto& id : metrics.at("training_chip_ids")) training_ids.insert(id.get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError("bad run metrics in " + dir.string() + ": " + e.what());
  }
  std::vector<Member> out;
  for (const auto& entry : metrics.at("checkpoints")) {
    const std::string file = entry.at("file").get<std::string>();
    out.push_back({run_prefix + "/" + file, trainer::load_checkpoint(dir / file, 2)});
  }
  return out;
}

}  // namespace

ResultsTable run_ablation(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset data = load_dataset(cfg);

  std::map<std::string, Pretrained> pretrained;
  for (const auto& v : cfg.variants) {
    if (v == "none") continue;
    Pretrained p;
    p.checkpoint = trainer::load_checkpoint(cfg.pretrained.at(v), 1);
    p.provider = std::make_unique<trainer::EmbeddingProvider>(p.checkpoint);
    pretrained.emplace(v, std::move(p));
  }

  std::vector<Job> jobs;
  for (const auto& v : cfg.variants) {
    for (int size : cfg.train_sizes) {
      for (auto seed : cfg.seeds(size)) jobs.push_back({v, size, seed});
    }
  }

  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      Pretrained* pre = job.variant == "none" ? nullptr : &pretrained.at(job.variant);
      try {
        run_job(cfg, data, job, pre);
      } catch (const std::exception& e) {
        const fs::path dir = run_dir(cfg, job.variant, job.size, job.seed);
        fs::create_directories(dir);
        write_text_file(dir / "error.json", json({{"error", e.what()}}).dump(2) + "\n");
        std::lock_guard lock(log_mutex);
        std::cerr << "run " << job.variant << "/" << job.size << "/" << job.seed << " failed: " << e.what() << "\n";
      }
    }
  };
  const int threads = std::min<int>(cfg.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ResultsTable table;
  for (const auto& v : cfg.variants) {
    for (int size : cfg.train_sizes) {
      ResultsRow row;
      row.variant = v;
      row.train_size = size;
      row.seeds = cfg.seeds(size);
      std::vector<std::string> missing;
      for (auto seed : row.seeds) {
        const fs::path dir = run_dir(cfg, v, size, seed);
        row.checkpoints += static_cast<int>(checkpoint_files(dir).size());
        if (!fs::exists(dir / kDoneMarker)) missing.push_back(std::to_string(seed));
      }
      if (!missing.empty()) {
        row.note = "failed seeds:";
        for (const auto& s : missing) row.note += " " + s;
        table.rows.push_back(std::move(row));
        continue;
      }

      const fs::path report_path = cell_dir(cfg, v, size) / kCellReport;
      metrics::MetricsReport report;
      if (fs::exists(report_path)) {
        try {
          report = metrics::metrics_report_from_json(json::parse(read_text_file(report_path)));
        } catch (const json::parse_error& e) {
          throw FormatError("bad cell report " + report_path.string() + ": " + e.what());
        }
      } else {
        std::set<std::string> training_ids = data.pretrain_ids;
        std::vector<Member> members;
        for (auto seed : row.seeds) {
          auto m = load_members(run_dir(cfg, v, size, seed), std::to_string(seed), training_ids);
          std::move(m.begin(), m.end(), std::back_inserter(members));
        }
        Pretrained* pre = v == "none" ? nullptr : &pretrained.at(v);
        const SuiteOutputs suite =
            evaluate_suite(members, data.test, v, training_ids, pre ? pre->provider.get() : nullptr);
        report = metrics::aggregate(suite.inputs);
        write_text_file(cell_dir(cfg, v, size) / "counts.csv", metrics::count_table_csv(report.chips));
        write_text_file(report_path, metrics::to_json(report).dump(2) + "\n");
      }
      row.metrics = row_metrics(report);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace sarslide::experiments
