#pragma once

// 4-bit superblock codec. A superblock covers 256 weights split into eight
// 32-weight blocks. Each weight is a 4-bit code; each block carries a 6-bit
// scale and a 6-bit min (stored one per byte), shared through a binary16
// superblock scale d and min dmin:
//
//   weight[j in block b] ~= (d * block_scales[b]) * code[j] - (dmin * block_mins[b])
//
// The fitting procedure is deterministic, with no iterative refinement:
//
//   per block:  scale_b = (max_b - min_b) / 15,  off_b = max(0, -min_b)
//   d    = fp16(max_b scale_b / 63)     dmin = fp16(max_b off_b / 63)
//   block_scales[b] = round(scale_b / d)   clamped to [0, 63]  (0 if d == 0)
//   block_mins[b]   = round(off_b / dmin)  clamped to [0, 63]  (0 if dmin == 0)
//   code[j]         = round((w_j + dmin * block_mins[b]) / (d * block_scales[b]))
//                     clamped to [0, 15]  (0 if the divisor is 0)
//
// A constant nonzero block has max_b == min_b and would collapse to zero under
// the plain formula, so it is encoded specially: for v > 0, scale_b = v / 15
// (codes land on 15); for v < 0, off_b = -v (codes land on 0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>

#include "spqt/common.hpp"
#include "spqt/fp16.hpp"

namespace spqt {

inline constexpr std::size_t kBlockSize = 32;
inline constexpr std::size_t kBlocksPerSuperblock = 8;
inline constexpr std::size_t kSuperblockSize = 256;
inline constexpr int kMaxCode = 15;
inline constexpr int kMaxBlockScale = 63;
inline constexpr std::size_t kSuperblockWireBytes = 148;

struct QuantSuperblock {
  uint16_t d_bits = 0;     // binary16 superblock scale
  uint16_t dmin_bits = 0;  // binary16 superblock min
  std::array<uint8_t, kBlocksPerSuperblock> block_scales{};
  std::array<uint8_t, kBlocksPerSuperblock> block_mins{};
  // element 2i in the low nibble, element 2i+1 in the high nibble of byte i
  std::array<uint8_t, kSuperblockSize / 2> codes{};

  float super_scale() const { return fp16_to_float(d_bits); }
  float super_min() const { return fp16_to_float(dmin_bits); }

  uint8_t code(std::size_t j) const {
    const uint8_t byte = codes[j >> 1];
    return (j & 1) ? static_cast<uint8_t>(byte >> 4) : static_cast<uint8_t>(byte & 0x0f);
  }
  void set_code(std::size_t j, uint8_t v) {
    uint8_t& byte = codes[j >> 1];
    if (j & 1) {
      byte = static_cast<uint8_t>((byte & 0x0f) | (v << 4));
    } else {
      byte = static_cast<uint8_t>((byte & 0xf0) | (v & 0x0f));
    }
  }

  bool operator==(const QuantSuperblock&) const = default;
};

inline QuantSuperblock quantize_superblock(std::span<const float> weights) {
  require(weights.size() == kSuperblockSize, "quantize_superblock: expected 256 weights");

  std::array<float, kBlocksPerSuperblock> scale{};
  std::array<float, kBlocksPerSuperblock> off{};
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    float lo = weights[b * kBlockSize];
    float hi = lo;
    for (std::size_t l = 0; l < kBlockSize; ++l) {
      const float w = weights[b * kBlockSize + l];
      require(std::isfinite(w), "quantize_superblock: non-finite input");
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    float s = (hi - lo) / 15.0f;
    float o = std::max(0.0f, -lo);
    if (s == 0.0f && hi != 0.0f) {
      // constant nonzero block
      if (hi > 0.0f) {
        s = hi / 15.0f;
        o = 0.0f;
      } else {
        o = -hi;
      }
    }
    scale[b] = s;
    off[b] = o;
  }

  float max_scale = 0.0f;
  float max_off = 0.0f;
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    max_scale = std::max(max_scale, scale[b]);
    max_off = std::max(max_off, off[b]);
  }

  QuantSuperblock sb;
  sb.d_bits = fp16_from_float(max_scale / 63.0f);
  sb.dmin_bits = fp16_from_float(max_off / 63.0f);
  const float d = sb.super_scale();
  const float dmin = sb.super_min();
  require(std::isfinite(d) && std::isfinite(dmin),
          "quantize_superblock: fitted scale exceeds binary16 range");

  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    int sc = 0;
    int mn = 0;
    if (d > 0.0f) sc = std::clamp(static_cast<int>(std::lround(scale[b] / d)), 0, kMaxBlockScale);
    if (dmin > 0.0f) mn = std::clamp(static_cast<int>(std::lround(off[b] / dmin)), 0, kMaxBlockScale);
    sb.block_scales[b] = static_cast<uint8_t>(sc);
    sb.block_mins[b] = static_cast<uint8_t>(mn);

    const float divisor = d * static_cast<float>(sc);
    const float shift = dmin * static_cast<float>(mn);
    for (std::size_t l = 0; l < kBlockSize; ++l) {
      const std::size_t j = b * kBlockSize + l;
      int code = 0;
      if (divisor > 0.0f) {
        code = std::clamp(static_cast<int>(std::lround((weights[j] + shift) / divisor)), 0,
                          kMaxCode);
      }
      sb.set_code(j, static_cast<uint8_t>(code));
    }
  }
  return sb;
}

inline void dequantize_superblock(const QuantSuperblock& sb, std::span<float> out) {
  require(out.size() == kSuperblockSize, "dequantize_superblock: expected 256 outputs");
  const float d = sb.super_scale();
  const float dmin = sb.super_min();
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    const float dsc = d * static_cast<float>(sb.block_scales[b]);
    const float dmn = dmin * static_cast<float>(sb.block_mins[b]);
    const uint8_t* cp = sb.codes.data() + b * (kBlockSize / 2);
    float* o = out.data() + b * kBlockSize;
    for (std::size_t i = 0; i < kBlockSize / 2; ++i) {
      o[2 * i] = dsc * static_cast<float>(cp[i] & 0x0f) - dmn;
      o[2 * i + 1] = dsc * static_cast<float>(cp[i] >> 4) - dmn;
    }
  }
}

}  // namespace spqt
