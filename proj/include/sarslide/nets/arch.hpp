#pragma once

#include <array>
#include <vector>

#include <json.hpp>

namespace sarslide::nets {

/// Residual blocks per encoder stage (ResNet-34 layout).
inline constexpr std::array<int, 4> kBlocksPerStage = {3, 4, 6, 3};
inline constexpr int kStemChannels = 64;
/// Stage-2 widths at width_scale = 1.
inline constexpr int kSegEmbedderChannels = 160;
inline constexpr int kSegFusionChannels = 256;

struct ArchConfig {
  /// Multiplies every channel count; 1.0 is full scale.
  double width_scale = 1.0;
  int embedding_channels = 64;
  /// Number of encoder stages (1..4); the embedding keeps full resolution.
  int encoder_depth = 4;
  int input_channels = 2;
  int chip_size = 128;

  void validate() const;

  /// max(1, round(base * width_scale)).
  int scaled(int base) const;

  int embedding_width() const { return scaled(embedding_channels); }
  /// Output channels of each encoder stage.
  std::vector<int> stage_channels() const;

  bool operator==(const ArchConfig&) const = default;
};

nlohmann::json to_json(const ArchConfig& arch);
ArchConfig arch_from_json(const nlohmann::json& j);

}  // namespace sarslide::nets
