#pragma once

// Seeded synthetic inputs for benchmarking and verification: standard-normal
// hidden states, uniform random weight matrices, and directly synthesized
// quantized matrices for shapes where materializing the float source would
// be wasteful (latency does not depend on the weight values).

#include <cstdint>
#include <random>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/fp16.hpp"
#include "spqt/matrix.hpp"

namespace spqt {

inline std::vector<float> random_normal_vector(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<float> out(n);
  for (float& v : out) v = dist(rng);
  return out;
}

inline FloatMatrix random_float_matrix(uint32_t m, uint32_t k, uint64_t seed, float lo = -1.0f,
                                       float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  FloatMatrix w(m, k);
  for (float& v : w.data) v = dist(rng);
  return w;
}

// Synthesizes valid superblocks without a float source. Requires the grouped
// axis to already be a multiple of 256 so no padding region exists.
inline QuantMatrix random_quant_matrix(uint32_t m, uint32_t k, Layout layout, uint64_t seed) {
  if (layout == Layout::Zigzag) {
    require(m % kSuperblockSize == 0, "random_quant_matrix: zigzag rows must be a multiple of 256");
  } else {
    require(k % kSuperblockSize == 0,
            "random_quant_matrix: rowgrouped cols must be a multiple of 256");
  }
  QuantMatrix q;
  q.layout = layout;
  q.rows = m;
  q.cols = k;
  q.padded_rows = m;
  q.padded_cols = k;
  const std::size_t count = std::size_t(q.grid_rows()) * q.grid_cols();
  q.superblocks.resize(count);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> scale_dist(1e-3f, 2e-2f);
  std::uniform_int_distribution<int> six(0, kMaxBlockScale);
  std::uniform_int_distribution<int> byte(0, 255);
  for (QuantSuperblock& sb : q.superblocks) {
    sb.d_bits = fp16_from_float(scale_dist(rng));
    sb.dmin_bits = fp16_from_float(scale_dist(rng));
    for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
      sb.block_scales[b] = static_cast<uint8_t>(six(rng));
      sb.block_mins[b] = static_cast<uint8_t>(six(rng));
    }
    for (auto& c : sb.codes) c = static_cast<uint8_t>(byte(rng));
  }
  return q;
}

}  // namespace spqt
