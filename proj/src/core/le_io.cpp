#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"

namespace sarslide {

namespace {

constexpr std::size_t kChunk = 4096;

inline void encode(float v, unsigned char* out) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  out[0] = static_cast<unsigned char>(bits & 0xffu);
  out[1] = static_cast<unsigned char>((bits >> 8) & 0xffu);
  out[2] = static_cast<unsigned char>((bits >> 16) & 0xffu);
  out[3] = static_cast<unsigned char>((bits >> 24) & 0xffu);
}

inline float decode(const unsigned char* in) {
  const std::uint32_t bits = static_cast<std::uint32_t>(in[0]) |
                             (static_cast<std::uint32_t>(in[1]) << 8) |
                             (static_cast<std::uint32_t>(in[2]) << 16) |
                             (static_cast<std::uint32_t>(in[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_f32_le(std::ostream& out, std::span<const float> values) {
  std::vector<unsigned char> buf(kChunk * 4);
  for (std::size_t start = 0; start < values.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, values.size() - start);
    for (std::size_t i = 0; i < n; ++i) encode(values[start + i], buf.data() + 4 * i);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(4 * n));
  }
}

std::size_t read_f32_le(std::istream& in, std::span<float> values) {
  std::vector<unsigned char> buf(kChunk * 4);
  std::size_t done = 0;
  while (done < values.size()) {
    const std::size_t want = std::min(kChunk, values.size() - done);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(4 * want));
    const auto got_bytes = static_cast<std::size_t>(in.gcount());
    const std::size_t got = got_bytes / 4;
    for (std::size_t i = 0; i < got; ++i) values[done + i] = decode(buf.data() + 4 * i);
    done += got;
    if (got < want) break;
  }
  return done;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sarslide
