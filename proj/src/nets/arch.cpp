#include "sarslide/nets/arch.hpp"

#include <cmath>

#include "sarslide/errors.hpp"
#include "sarslide/json_util.hpp"

namespace sarslide::nets {

void ArchConfig::validate() const {
  if (!(width_scale > 0.0 && width_scale <= 1.0)) throw ConfigError("arch.width_scale must lie in (0,1]");
  if (embedding_channels < 1) throw ConfigError("arch.embedding_channels must be >= 1");
  if (encoder_depth < 1 || encoder_depth > static_cast<int>(kBlocksPerStage.size())) {
    throw ConfigError("arch.encoder_depth must lie in [1,4]");
  }
  if (input_channels < 1) throw ConfigError("arch.input_channels must be >= 1");
  const int stride = 1 << (encoder_depth - 1);
  if (chip_size < stride || chip_size % stride != 0) {
    throw ConfigError("arch.chip_size must be a positive multiple of 2^(encoder_depth-1)");
  }
}

int ArchConfig::scaled(int base) const {
  return std::max(1, static_cast<int>(std::lround(base * width_scale)));
}

std::vector<int> ArchConfig::stage_channels() const {
  std::vector<int> out;
  for (int s = 0; s < encoder_depth; ++s) out.push_back(scaled(kStemChannels << s));
  return out;
}

nlohmann::json to_json(const ArchConfig& a) {
  return {{"width_scale", a.width_scale},       {"embedding_channels", a.embedding_channels},
          {"encoder_depth", a.encoder_depth},   {"input_channels", a.input_channels},
          {"chip_size", a.chip_size}};
}

ArchConfig arch_from_json(const nlohmann::json& j) {
  const std::string ctx = "arch";
  require_known_keys(j, {"width_scale", "embedding_channels", "encoder_depth", "input_channels", "chip_size"}, ctx);
  ArchConfig a;
  read_optional(j, "width_scale", a.width_scale, ctx);
  read_optional(j, "embedding_channels", a.embedding_channels, ctx);
  read_optional(j, "encoder_depth", a.encoder_depth, ctx);
  read_optional(j, "input_channels", a.input_channels, ctx);
  read_optional(j, "chip_size", a.chip_size, ctx);
  a.validate();
  return a;
}

}  // namespace sarslide::nets
