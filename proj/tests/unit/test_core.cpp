#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

#include "sarslide/errors.hpp"
#include "sarslide/io_util.hpp"
#include "sarslide/tensor.hpp"
#include "test_util.hpp"

using namespace sarslide;

TEST(Tensor, ShapeAndIndexing) {
  Tensor t({2, 3, 4}, 1.5f);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rank(), 3);
  t.at(1, 2, 3) = 7.0f;
  EXPECT_EQ(t[23], 7.0f);
  EXPECT_EQ(t.shape_string(), "(2,3,4)");
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), std::invalid_argument);
}

TEST(Tensor, FiniteAndBitwise) {
  Tensor a({3}, 0.0f), b({3}, 0.0f);
  EXPECT_TRUE(bitwise_equal(a, b));
  b[1] = -0.0f;
  EXPECT_FALSE(bitwise_equal(a, b));
  EXPECT_TRUE(b.all_finite());
  b[2] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(b.all_finite());
  EXPECT_FALSE(bitwise_equal(a, Tensor({1, 3})));
}

TEST(LittleEndianIo, RoundTripPreservesBitPatterns) {
  std::vector<float> v = {0.0f, -0.0f, 1.0f, -2.5f, std::numeric_limits<float>::denorm_min(),
                          std::numeric_limits<float>::infinity(), std::numeric_limits<float>::quiet_NaN()};
  std::stringstream buf;
  write_f32_le(buf, v);
  EXPECT_EQ(buf.str().size(), v.size() * 4);
  std::vector<float> back(v.size());
  EXPECT_EQ(read_f32_le(buf, back), v.size());
  EXPECT_EQ(std::memcmp(v.data(), back.data(), v.size() * 4), 0);
}

TEST(LittleEndianIo, ByteOrderIsLittle) {
  std::stringstream buf;
  const float one = 1.0f;
  write_f32_le(buf, std::span<const float>(&one, 1));
  const std::string s = buf.str();
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(s[2]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(s[3]), 0x3F);
}

TEST(LittleEndianIo, ShortReadReportsCount) {
  std::stringstream buf;
  std::vector<float> v = {1.0f, 2.0f};
  write_f32_le(buf, v);
  std::vector<float> back(3);
  EXPECT_EQ(read_f32_le(buf, back), 2u);
}

TEST(Hashing, KnownSha256) {
  EXPECT_EQ(sha256_hex(std::string("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string()), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  Sha256 h;
  h.update(std::string("a"));
  h.update(std::string("bc"));
  EXPECT_EQ(h.hex_digest(), sha256_hex(std::string("abc")));
}

TEST(Hashing, DeriveSeedIsDeterministicAndSpread) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base) {
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(base, s));
  }
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(TextFiles, AtomicWriteAndMissingRead) {
  testing_util::TempDir dir;
  write_text_file(dir / "a.txt", "hello\n");
  EXPECT_EQ(read_text_file(dir / "a.txt"), "hello\n");
  EXPECT_THROW(read_text_file(dir / "missing.txt"), DataError);
}

TEST(Errors, CodesAndNames) {
  EXPECT_EQ(static_cast<int>(ConfigError("x").kind()), 2);
  EXPECT_EQ(static_cast<int>(FormatError("x").kind()), 3);
  EXPECT_EQ(static_cast<int>(TrainingError("x").kind()), 4);
  EXPECT_STREQ(error_code_name(ErrorKind::data), "DATA");
}
