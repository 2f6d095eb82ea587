#pragma once

// Test-only 64-bit scalar oracle for the superblock codec. Re-implements the
// fitting and dequantization formulas entirely in double precision with an
// independent binary16 rounding path (frexp/nearbyint instead of bit tricks).
// Must stay independent of the library implementation it checks.

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace spqt_test {

// Round a double to the nearest binary16 value (ties to even), returned as a
// double. Relies on the default FE_TONEAREST rounding mode.
inline double fp16_round_oracle(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::fabs(v);
  const double sign = v < 0.0 ? -1.0 : 1.0;
  int exp = 0;
  std::frexp(mag, &exp);  // mag = f * 2^exp, f in [0.5, 1)
  double rounded;
  if (exp - 1 >= -14) {
    // normal half: 11 significand bits
    const double scaled = std::ldexp(mag, 11 - exp);  // in [1024, 2048)
    rounded = std::ldexp(std::nearbyint(scaled), exp - 11);
  } else {
    // subnormal half: quantum 2^-24
    rounded = std::ldexp(std::nearbyint(std::ldexp(mag, 24)), -24);
  }
  if (rounded > 65504.0) return sign * std::numeric_limits<double>::infinity();
  return sign * rounded;
}

struct OracleSuperblock {
  double d = 0.0;
  double dmin = 0.0;
  int block_scales[8] = {0};
  int block_mins[8] = {0};
  int codes[256] = {0};
};

inline OracleSuperblock quantize_superblock_oracle(std::span<const float> w) {
  OracleSuperblock sb;
  double scale[8];
  double off[8];
  for (int b = 0; b < 8; ++b) {
    double lo = w[b * 32];
    double hi = lo;
    for (int l = 1; l < 32; ++l) {
      lo = std::min(lo, static_cast<double>(w[b * 32 + l]));
      hi = std::max(hi, static_cast<double>(w[b * 32 + l]));
    }
    double s = (hi - lo) / 15.0;
    double o = std::max(0.0, -lo);
    if (s == 0.0 && hi != 0.0) {
      if (hi > 0.0) {
        s = hi / 15.0;
        o = 0.0;
      } else {
        o = -hi;
      }
    }
    scale[b] = s;
    off[b] = o;
  }
  double max_scale = 0.0;
  double max_off = 0.0;
  for (int b = 0; b < 8; ++b) {
    max_scale = std::max(max_scale, scale[b]);
    max_off = std::max(max_off, off[b]);
  }
  sb.d = fp16_round_oracle(max_scale / 63.0);
  sb.dmin = fp16_round_oracle(max_off / 63.0);
  for (int b = 0; b < 8; ++b) {
    if (sb.d > 0.0) {
      sb.block_scales[b] =
          std::clamp(static_cast<int>(std::llround(scale[b] / sb.d)), 0, 63);
    }
    if (sb.dmin > 0.0) {
      sb.block_mins[b] = std::clamp(static_cast<int>(std::llround(off[b] / sb.dmin)), 0, 63);
    }
    const double divisor = sb.d * sb.block_scales[b];
    const double shift = sb.dmin * sb.block_mins[b];
    for (int l = 0; l < 32; ++l) {
      const int j = b * 32 + l;
      if (divisor > 0.0) {
        sb.codes[j] = std::clamp(
            static_cast<int>(std::llround((static_cast<double>(w[j]) + shift) / divisor)), 0, 15);
      }
    }
  }
  return sb;
}

inline std::vector<double> dequantize_superblock_oracle(const OracleSuperblock& sb) {
  std::vector<double> out(256);
  for (int b = 0; b < 8; ++b) {
    const double dsc = sb.d * sb.block_scales[b];
    const double dmn = sb.dmin * sb.block_mins[b];
    for (int l = 0; l < 32; ++l) out[b * 32 + l] = dsc * sb.codes[b * 32 + l] - dmn;
  }
  return out;
}

// exact running-sum exclusive scan
inline std::vector<uint32_t> sequential_exclusive_scan(std::span<const uint8_t> bits,
                                                       uint32_t* total = nullptr) {
  std::vector<uint32_t> out(bits.size());
  uint32_t running = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    out[i] = running;
    running += bits[i] ? 1 : 0;
  }
  if (total != nullptr) *total = running;
  return out;
}

// independent nearest-rank quantile
inline float quantile_oracle(std::vector<float> samples, double s) {
  std::sort(samples.begin(), samples.end());
  if (s == 0.0) return 0.0f;
  const auto rank = static_cast<std::size_t>(std::ceil(s * static_cast<double>(samples.size())));
  return samples[rank - 1];
}

}  // namespace spqt_test
