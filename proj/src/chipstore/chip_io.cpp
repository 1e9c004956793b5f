#include "sarslide/chipstore/chip_io.hpp"

#include <fstream>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"

namespace sarslide::chipstore {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path stem_of(const fs::path& path) {
  auto p = path;
  if (p.extension() == ".json" || p.extension() == ".bin") p.replace_extension();
  return p;
}

template <typename T>
T header_field(const json& header, const char* key) {
  if (!header.contains(key)) throw FormatError(std::string("header: missing field '") + key + "'");
  try {
    return header.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("header: field '") + key + "' has wrong type");
  }
}

}  // namespace

fs::path write_chip(const Chip& chip, const fs::path& dir, const json& provenance) {
  chip.validate();
  fs::create_directories(dir);
  const int n = chip.size();
  json header = {
      {"format_version", kChipFormatVersion},
      {"chip_id", chip.chip_id},
      {"shape", {kChannels, n, n}},
      {"channels", {kChannelNames[0], kChannelNames[1]}},
      {"has_landslide", chip.has_landslide},
      {"dtype", "float32"},
      {"byte_order", "little"},
      {"layout", {"pre.VV", "pre.VH", "post.VV", "post.VH", "mask"}},
      {"payload", chip.chip_id + ".bin"},
      {"provenance", provenance},
  };
  const fs::path base = dir / chip.chip_id;
  {
    std::ofstream out(fs::path(base).replace_extension(".bin"), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write payload for chip " + chip.chip_id);
    write_f32_le(out, chip.pre.values());
    write_f32_le(out, chip.post.values());
    std::vector<float> mask(chip.mask.begin(), chip.mask.end());
    write_f32_le(out, mask);
    if (!out) throw DataError("payload write failed for chip " + chip.chip_id);
  }
  const fs::path header_path = fs::path(base).replace_extension(".json");
  write_text_file(header_path, header.dump(2) + "\n");
  return header_path;
}

Chip read_chip(const fs::path& path) {
  const fs::path base = stem_of(path);
  const fs::path header_path = fs::path(base).replace_extension(".json");
  json header;
  try {
    header = json::parse(read_text_file(header_path));
  } catch (const json::parse_error& e) {
    throw FormatError("header: malformed JSON in " + header_path.string() + ": " + e.what());
  }
  if (!header.is_object()) throw FormatError("header: not a JSON object");
  if (header_field<int>(header, "format_version") != kChipFormatVersion) {
    throw FormatError("header: unsupported format_version");
  }
  if (header_field<std::string>(header, "dtype") != "float32" ||
      header_field<std::string>(header, "byte_order") != "little") {
    throw FormatError("header: payload must be little-endian float32");
  }
  const auto shape = header_field<std::vector<int>>(header, "shape");
  if (shape.size() != 3 || shape[0] != kChannels || shape[1] <= 0 || shape[1] != shape[2]) {
    throw FormatError("shape: expected [2,S,S]");
  }
  const auto channels = header_field<std::vector<std::string>>(header, "channels");
  if (channels.size() != 2 || channels[0] != "VV" || channels[1] != "VH") {
    throw FormatError("channels: expected [\"VV\",\"VH\"]");
  }

  Chip chip;
  chip.chip_id = header_field<std::string>(header, "chip_id");
  chip.has_landslide = header_field<bool>(header, "has_landslide");
  const int n = shape[1];
  chip.pre = Tensor({kChannels, n, n});
  chip.post = Tensor({kChannels, n, n});
  std::vector<float> mask(static_cast<std::size_t>(n) * n);

  const fs::path payload_path = base.parent_path() / header_field<std::string>(header, "payload");
  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw FormatError("payload: cannot open " + payload_path.string());
  for (auto span : {chip.pre.values(), chip.post.values(), std::span<float>(mask)}) {
    if (read_f32_le(in, span) != span.size()) throw FormatError("unexpected end of payload");
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw FormatError("payload: trailing bytes beyond declared shape");
  }

  chip.mask.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0.0f) {
      chip.mask[i] = 0;
    } else if (mask[i] == 1.0f) {
      chip.mask[i] = 1;
    } else {
      throw FormatError("mask not binary");
    }
  }
  chip.validate();
  return chip;
}

void write_chipset(const ChipSet& set, const fs::path& dir, const json& generator) {
  set.validate();
  fs::create_directories(dir);
  json ids = json::array();
  for (const auto& chip : set.chips) {
    write_chip(chip, dir, generator.is_null() ? json(set.provenance) : generator);
    ids.push_back(chip.chip_id);
  }
  json index = {
      {"format_version", kChipFormatVersion},
      {"provenance", set.provenance},
      {"pixel_spacing_m", set.pixel_spacing_m},
      {"chip_ids", ids},
      {"generator", generator},
  };
  write_text_file(dir / "chipset.json", index.dump(2) + "\n");
}

ChipSet read_chipset(const fs::path& dir) {
  const fs::path index_path = dir / "chipset.json";
  if (!fs::exists(index_path)) throw DataError("no chipset.json in " + dir.string());
  json index;
  try {
    index = json::parse(read_text_file(index_path));
  } catch (const json::parse_error& e) {
    throw FormatError("chipset.json: malformed JSON: " + std::string(e.what()));
  }
  ChipSet set;
  set.provenance = header_field<std::string>(index, "provenance");
  set.pixel_spacing_m = header_field<double>(index, "pixel_spacing_m");
  for (const auto& id : header_field<std::vector<std::string>>(index, "chip_ids")) {
    set.chips.push_back(read_chip(dir / (id + ".json")));
    if (set.chips.back().chip_id != id) throw FormatError("chip_id: header disagrees with chipset index for " + id);
  }
  set.validate();
  return set;
}

json read_chipset_generator(const fs::path& dir) {
  const auto index = json::parse(read_text_file(dir / "chipset.json"));
  return index.value("generator", json());
}

}  // namespace sarslide::chipstore
