#include "sarslide/trainer/checkpoint.hpp"

#include <fstream>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"

namespace sarslide::trainer {

namespace fs = std::filesystem;
using nlohmann::json;

nets::Stage1Params Checkpoint::stage1() const {
  if (stage != 1) throw DataError("checkpoint is not a stage-1 checkpoint");
  return {arch, params};
}

nets::Stage2Params Checkpoint::stage2() const {
  if (stage != 2) throw DataError("checkpoint is not a stage-2 checkpoint");
  return {arch, uses_pretrained, params};
}

namespace {

fs::path stem_of(const fs::path& path) {
  auto p = path;
  if (p.extension() == ".json" || p.extension() == ".bin") p.replace_extension();
  return p;
}

}  // namespace

fs::path save_checkpoint(const Checkpoint& cp, const fs::path& stem_path) {
  const fs::path stem = stem_of(stem_path);
  if (!stem.parent_path().empty()) fs::create_directories(stem.parent_path());
  json tensors = json::array();
  Sha256 hash;
  for (std::size_t i = 0; i < cp.params.entries(); ++i) {
    tensors.push_back({{"name", cp.params.name(i)}, {"shape", cp.params.tensor(i).shape()}});
    hash.update(std::span<const float>(cp.params.tensor(i).values()));
  }
  const fs::path bin = fs::path(stem).replace_extension(".bin");
  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint payload " + bin.string());
    for (std::size_t i = 0; i < cp.params.entries(); ++i) write_f32_le(out, cp.params.tensor(i).values());
    if (!out) throw DataError("checkpoint payload write failed: " + bin.string());
  }
  json meta = {
      {"format_version", kCheckpointFormatVersion},
      {"stage", cp.stage},
      {"arch", nets::to_json(cp.arch)},
      {"uses_pretrained", cp.uses_pretrained},
      {"epoch", cp.epoch},
      {"val_metric", cp.val_metric},
      {"val_loss", cp.val_loss},
      {"seed", cp.seed},
      {"pretrained_sha256", cp.pretrained_sha256},
      {"norm", cp.norm ? chipstore::to_json(*cp.norm) : json(nullptr)},
      {"embedding_stats", cp.embedding_stats ? json({{"mean", cp.embedding_stats->mean}, {"std", cp.embedding_stats->std}})
                                             : json(nullptr)},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"tensors", tensors},
      {"payload", bin.filename().string()},
      {"payload_sha256", hash.hex_digest()},
  };
  const fs::path meta_path = fs::path(stem).replace_extension(".json");
  write_text_file(meta_path, meta.dump(2) + "\n");
  return meta_path;
}

Checkpoint load_checkpoint(const fs::path& path, std::optional<int> expected_stage) {
  const fs::path stem = stem_of(path);
  const fs::path meta_path = fs::path(stem).replace_extension(".json");
  json meta;
  try {
    meta = json::parse(read_text_file(meta_path));
  } catch (const json::parse_error& e) {
    throw FormatError("checkpoint: malformed metadata in " + meta_path.string() + ": " + e.what());
  }
  Checkpoint cp;
  std::vector<std::pair<std::string, std::vector<int>>> layout;
  std::string payload, expected_hash;
  try {
    if (meta.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version in " + meta_path.string());
    }
    if (meta.at("dtype") != "float32" || meta.at("byte_order") != "little") {
      throw FormatError("checkpoint: payload must be little-endian float32");
    }
    cp.stage = meta.at("stage").get<int>();
    cp.arch = nets::arch_from_json(meta.at("arch"));
    cp.uses_pretrained = meta.at("uses_pretrained").get<bool>();
    cp.epoch = meta.at("epoch").get<int>();
    cp.val_metric = meta.at("val_metric").get<double>();
    cp.val_loss = meta.at("val_loss").get<double>();
    cp.seed = meta.at("seed").get<std::uint64_t>();
    cp.pretrained_sha256 = meta.at("pretrained_sha256").get<std::string>();
    if (!meta.at("norm").is_null()) cp.norm = chipstore::norm_stats_from_json(meta.at("norm"));
    if (const json& es = meta.at("embedding_stats"); !es.is_null()) {
      cp.embedding_stats = nets::EmbeddingStats{es.at("mean").get<std::vector<double>>(),
                                                es.at("std").get<std::vector<double>>()};
    }
    for (const auto& t : meta.at("tensors")) {
      layout.emplace_back(t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>());
    }
    payload = meta.at("payload").get<std::string>();
    expected_hash = meta.at("payload_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("checkpoint: bad metadata in " + meta_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: bad arch: ") + e.what());
  }
  if (cp.stage != 1 && cp.stage != 2) throw FormatError("checkpoint: stage must be 1 or 2");
  if (expected_stage && cp.stage != *expected_stage) {
    throw DataError("checkpoint " + meta_path.string() + " has stage " + std::to_string(cp.stage) + ", expected " +
                    std::to_string(*expected_stage));
  }

  std::ifstream in(stem.parent_path() / payload, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open payload " + payload);
  Sha256 hash;
  for (const auto& [name, shape] : layout) {
    Tensor& t = cp.params.add(name, shape);
    if (read_f32_le(in, t.values()) != t.size()) throw FormatError("checkpoint: unexpected end of payload");
    hash.update(std::span<const float>(t.values()));
  }
  if (in.peek() != std::ifstream::traits_type::eof()) throw FormatError("checkpoint: trailing bytes in payload");
  if (hash.hex_digest() != expected_hash) throw FormatError("checkpoint: payload checksum mismatch");

  // The stored layout must be exactly what the architecture builds.
  const auto fresh = nets::init_params(cp.arch, cp.stage, 0, cp.uses_pretrained);
  const nets::ParamStore& ref = cp.stage == 1 ? std::get<nets::Stage1Params>(fresh).params
                                              : std::get<nets::Stage2Params>(fresh).params;
  if (ref.entries() != cp.params.entries()) throw FormatError("checkpoint: tensor list does not match architecture");
  for (std::size_t i = 0; i < ref.entries(); ++i) {
    if (ref.name(i) != cp.params.name(i) || !ref.tensor(i).same_shape(cp.params.tensor(i))) {
      throw FormatError("checkpoint: tensor " + cp.params.name(i) + " does not match architecture");
    }
  }
  return cp;
}

}  // namespace sarslide::trainer
