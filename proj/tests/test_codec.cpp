#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spqt/fp16.hpp"
#include "spqt/superblock.hpp"
#include "support/codec_oracle.hpp"

using namespace spqt;

namespace {

int32_t float_ulp_distance(float a, float b) {
  if (a == b) return 0;
  const auto to_ordered = [](float f) {
    int32_t i = std::bit_cast<int32_t>(f);
    return i < 0 ? std::numeric_limits<int32_t>::min() - i : i;
  };
  const int64_t d = int64_t(to_ordered(a)) - int64_t(to_ordered(b));
  return static_cast<int32_t>(d < 0 ? -d : d);
}

std::array<float, 256> constant_superblock(float v) {
  std::array<float, 256> w;
  w.fill(v);
  return w;
}

}  // namespace

TEST_CASE("zero superblock stays exactly zero") {
  const auto w = constant_superblock(0.0f);
  const QuantSuperblock sb = quantize_superblock(w);
  CHECK(sb.d_bits == 0);
  CHECK(sb.dmin_bits == 0);
  for (std::size_t j = 0; j < 256; ++j) CHECK(sb.code(j) == 0);
  float out[256];
  dequantize_superblock(sb, out);
  for (float v : out) CHECK(v == 0.0f);
}

TEST_CASE("constant positive superblock does not collapse and matches the oracle") {
  const auto w = constant_superblock(3.0f);
  const QuantSuperblock sb = quantize_superblock(w);
  // the degenerate-case handling pins codes to 15 with full block scales
  for (std::size_t b = 0; b < 8; ++b) {
    CHECK(sb.block_scales[b] == 63);
    CHECK(sb.block_mins[b] == 0);
  }
  for (std::size_t j = 0; j < 256; ++j) CHECK(sb.code(j) == 15);

  float out[256];
  dequantize_superblock(sb, out);
  const auto oracle = spqt_test::quantize_superblock_oracle(w);
  const auto oracle_out = spqt_test::dequantize_superblock_oracle(oracle);
  for (std::size_t j = 0; j < 256; ++j) {
    CHECK(sb.code(j) == oracle.codes[j]);
    CHECK(out[j] == doctest::Approx(oracle_out[j]).epsilon(1e-7));
    // error limited to the binary16 rounding of the superblock scale
    CHECK(std::fabs(out[j] - 3.0f) / 3.0f <= 0x1p-11 + 1e-6);
    CHECK(out[j] != 0.0f);
  }
}

TEST_CASE("constant negative superblock is preserved through the min path") {
  const auto w = constant_superblock(-1.5f);
  const QuantSuperblock sb = quantize_superblock(w);
  CHECK(sb.d_bits == 0);
  for (std::size_t j = 0; j < 256; ++j) CHECK(sb.code(j) == 0);
  for (std::size_t b = 0; b < 8; ++b) CHECK(sb.block_mins[b] == 63);
  float out[256];
  dequantize_superblock(sb, out);
  for (float v : out) {
    CHECK(std::fabs(v - (-1.5f)) / 1.5f <= 0x1p-11 + 1e-6);
  }
}

TEST_CASE("grid-aligned constants round-trip exactly") {
  // 945 = 63 * 15, so v = 945 * h dequantizes exactly back to v whenever h is
  // a binary16 value; symmetrically v = -63 * h for the min path.
  for (float v : {945.0f * 0x1p-10f, 945.0f * 0x1p-12f, 945.0f * 1.5f * 0x1p-10f, 945.0f * 0.25f}) {
    const auto w = constant_superblock(v);
    float out[256];
    dequantize_superblock(quantize_superblock(w), out);
    for (float o : out) CHECK(o == v);
  }
  for (float v : {-63.0f * 0x1p-6f, -63.0f * 0x1p-8f, -63.0f * 1.25f * 0x1p-6f}) {
    const auto w = constant_superblock(v);
    float out[256];
    dequantize_superblock(quantize_superblock(w), out);
    for (float o : out) CHECK(o == v);
  }
}

TEST_CASE("dequantize algebraic identity at full code range") {
  QuantSuperblock sb;
  sb.d_bits = fp16_from_float(1.0f / 63.0f);
  sb.dmin_bits = 0;
  sb.block_scales.fill(63);
  sb.block_mins.fill(0);
  for (std::size_t j = 0; j < 256; ++j) sb.set_code(j, 15);

  const float d = fp16_to_float(sb.d_bits);
  CHECK(d == doctest::Approx(0.015869140625f));  // binary16 rounding of 1/63
  float out[256];
  dequantize_superblock(sb, out);
  for (float v : out) {
    CHECK(v == 15.0f * (d * 63.0f));
    CHECK(v == 14.996337890625f);
  }
}

TEST_CASE("uniform random superblock agrees with the 64-bit scalar oracle") {
  std::mt19937 rng(7701);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::array<float, 256> w;
  for (int round = 0; round < 50; ++round) {
    for (auto& v : w) v = dist(rng);
    const QuantSuperblock sb = quantize_superblock(w);
    const auto oracle = spqt_test::quantize_superblock_oracle(w);

    CHECK(static_cast<double>(sb.super_scale()) == doctest::Approx(oracle.d).epsilon(1e-6));
    for (std::size_t b = 0; b < 8; ++b) {
      CHECK(sb.block_scales[b] == oracle.block_scales[b]);
      CHECK(sb.block_mins[b] == oracle.block_mins[b]);
    }
    for (std::size_t j = 0; j < 256; ++j) CHECK(sb.code(j) == oracle.codes[j]);

    float out[256];
    dequantize_superblock(sb, out);
    const auto oracle_out = spqt_test::dequantize_superblock_oracle(oracle);
    double impl_se = 0.0;
    double oracle_se = 0.0;
    for (std::size_t j = 0; j < 256; ++j) {
      CHECK(float_ulp_distance(out[j], static_cast<float>(oracle_out[j])) <= 1);
      impl_se += (out[j] - w[j]) * double(out[j] - w[j]);
      oracle_se += (oracle_out[j] - w[j]) * (oracle_out[j] - w[j]);
    }
    const double impl_rmse = std::sqrt(impl_se / 256.0);
    const double oracle_rmse = std::sqrt(oracle_se / 256.0);
    CHECK(impl_rmse <= oracle_rmse + 1e-6);
    // 4-bit codes over 32-wide blocks on [-1, 1]: error stays well under a step
    CHECK(impl_rmse < 0.05);
  }
}

TEST_CASE("code and scale ranges hold for fuzzed inputs") {
  std::mt19937 rng(991);
  std::array<float, 256> w;
  for (int round = 0; round < 300; ++round) {
    std::uniform_real_distribution<float> dist(-std::ldexp(1.0f, rng() % 20),
                                               std::ldexp(1.0f, rng() % 20));
    for (auto& v : w) v = dist(rng);
    if (round % 5 == 0) {
      // inject constant and zero blocks
      for (int l = 0; l < 32; ++l) w[l] = 0.25f;
      for (int l = 32; l < 64; ++l) w[l] = 0.0f;
      for (int l = 64; l < 96; ++l) w[l] = -7.5f;
    }
    const QuantSuperblock sb = quantize_superblock(w);
    CHECK(sb.super_scale() >= 0.0f);
    CHECK(sb.super_min() >= 0.0f);
    for (std::size_t b = 0; b < 8; ++b) {
      CHECK(sb.block_scales[b] <= 63);
      CHECK(sb.block_mins[b] <= 63);
    }
    for (std::size_t j = 0; j < 256; ++j) CHECK(sb.code(j) <= 15);
  }
}

TEST_CASE("all-zero 32-blocks inside a mixed superblock dequantize to exact zero") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  std::array<float, 256> w;
  for (auto& v : w) v = dist(rng);
  for (int l = 96; l < 128; ++l) w[l] = 0.0f;  // one all-zero block
  const QuantSuperblock sb = quantize_superblock(w);
  float out[256];
  dequantize_superblock(sb, out);
  // scale_b = off_b = 0 for the zero block, so every element decodes to 0
  for (int l = 96; l < 128; ++l) CHECK(out[l] == 0.0f);
}

TEST_CASE("rejects invalid inputs") {
  std::array<float, 256> w{};
  w[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(quantize_superblock(w), SpqtError);
  w[3] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(quantize_superblock(w), SpqtError);
  w[3] = 1e30f;  // fitted scale overflows binary16
  CHECK_THROWS_AS(quantize_superblock(w), SpqtError);
  std::vector<float> short_input(100, 0.0f);
  CHECK_THROWS_AS(quantize_superblock(short_input), SpqtError);
}
