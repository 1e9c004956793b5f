#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

namespace sarslide {

/// Appends `values` to `out` as little-endian IEEE-754 float32.
void write_f32_le(std::ostream& out, std::span<const float> values);

/// Reads exactly `values.size()` little-endian float32 values. Returns the
/// number of values fully read; fewer than requested means the stream ended.
std::size_t read_f32_le(std::istream& in, std::span<float> values);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// Incremental SHA-256 over float buffers (bit patterns, little-endian).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes);
  void update(std::span<const float> values);
  void update(const std::string& text);
  std::string hex_digest();

 private:
  void* ctx_;
};

/// Mixes a base seed with a stream index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace sarslide
