#pragma once

// IEEE 754 binary16 conversion, round-to-nearest-even. Superblock scales and
// mins are stored in this format; everything else stays in binary32.

#include <bit>
#include <cstdint>

namespace spqt {

inline float fp16_to_float(uint16_t h) {
  uint32_t sign = (static_cast<uint32_t>(h) & 0x8000u) << 16;
  uint32_t exp = (h >> 10) & 0x1fu;
  uint32_t mant = h & 0x3ffu;
  uint32_t f;
  if (exp == 0) {
    if (mant == 0) {
      f = sign;
    } else {
      // subnormal: renormalize
      exp = 1;
      while (!(mant & 0x400u)) {
        mant <<= 1;
        --exp;
      }
      mant &= 0x3ffu;
      f = sign | ((exp + 127 - 15) << 23) | (mant << 13);
    }
  } else if (exp == 31) {
    f = sign | 0x7f800000u | (mant << 13);
  } else {
    f = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(f);
}

inline uint16_t fp16_from_float(float value) {
  const uint32_t x = std::bit_cast<uint32_t>(value);
  const auto sign = static_cast<uint16_t>((x >> 16) & 0x8000u);
  const uint32_t exp_field = (x >> 23) & 0xffu;
  uint32_t m = x & 0x7fffffu;

  if (exp_field == 0xffu) {  // inf / nan
    return static_cast<uint16_t>(sign | 0x7c00u | (m != 0 ? 0x200u : 0u));
  }
  int32_t e = static_cast<int32_t>(exp_field) - 127 + 15;
  if (e >= 31) {
    return static_cast<uint16_t>(sign | 0x7c00u);
  }
  if (e <= 0) {
    // subnormal half, or underflow to zero
    if (e < -10) return sign;
    m |= 0x800000u;
    const uint32_t shift = static_cast<uint32_t>(14 - e);  // 14..24
    const uint32_t half = 1u << (shift - 1);
    const uint32_t rounded = (m + half - 1 + ((m >> shift) & 1u)) >> shift;
    return static_cast<uint16_t>(sign | rounded);
  }
  // normal: 23 -> 10 mantissa bits with round-to-nearest-even
  uint32_t rounded = (m + 0xfffu + ((m >> 13) & 1u)) >> 13;
  if (rounded == 0x400u) {  // mantissa carry
    rounded = 0;
    ++e;
    if (e >= 31) return static_cast<uint16_t>(sign | 0x7c00u);
  }
  return static_cast<uint16_t>(sign | (static_cast<uint32_t>(e) << 10) | rounded);
}

inline float fp16_round(float value) { return fp16_to_float(fp16_from_float(value)); }

}  // namespace spqt
