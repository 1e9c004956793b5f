#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "sarslide/chipstore/normalize.hpp"
#include "sarslide/chipstore/synthetic.hpp"

namespace testing_util {

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "sarslide_test_XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline sarslide::chipstore::SyntheticConfig small_synthetic(int n, int chip_size, std::uint64_t seed) {
  sarslide::chipstore::SyntheticConfig c;
  c.n_chips = n;
  c.chip_size = chip_size;
  c.blob_radius_range_px = {2, std::max(2, chip_size / 4 - 1)};
  c.seed = seed;
  return c;
}

inline std::vector<sarslide::chipstore::Sample> small_samples(int n, int chip_size, std::uint64_t seed,
                                                              double contrast = 4.0, int looks = 16) {
  auto c = small_synthetic(n, chip_size, seed);
  c.contrast = contrast;
  c.looks = looks;
  return sarslide::chipstore::normalize_chipset(sarslide::chipstore::generate_synthetic_chipset(c)).samples;
}

}  // namespace testing_util
