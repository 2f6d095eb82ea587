#pragma once

// Weight layouts.
//
// RowGrouped: superblock (r, c) covers row r, columns [256c, 256c+256).
//   Grid is m x ceil(k/256), stored row-major. The conventional layout:
//   a quantization group runs along one row.
//
// Zigzag: superblock (R, c) covers rows [256R, 256R+256) of column c.
//   Grid is ceil(m/256) x k, stored row-major, so all k superblocks of a
//   superblock-row are contiguous. Grouping is column-wise (one superblock
//   per hidden-state entry and 256 output rows), while storage stays
//   row-major over the grid, keeping output regions contiguous.
//
// The grouped axis is zero-padded up to a multiple of 256; logical dims are
// kept alongside so padding never reaches the output.

#include <cstdint>
#include <span>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/superblock.hpp"
#include "spqt/thread_pool.hpp"

namespace spqt {

enum class Layout : uint8_t { RowGrouped = 0, Zigzag = 1 };

inline const char* layout_name(Layout l) {
  return l == Layout::RowGrouped ? "rowgrouped" : "zigzag";
}

struct FloatMatrix {
  uint32_t rows = 0;
  uint32_t cols = 0;
  std::vector<float> data;  // row-major, rows * cols

  FloatMatrix() = default;
  FloatMatrix(uint32_t m, uint32_t k) : rows(m), cols(k), data(std::size_t(m) * k, 0.0f) {}

  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

struct QuantMatrix {
  Layout layout = Layout::RowGrouped;
  uint32_t rows = 0;  // logical output dimension m
  uint32_t cols = 0;  // logical input dimension k
  uint32_t padded_rows = 0;
  uint32_t padded_cols = 0;
  std::vector<QuantSuperblock> superblocks;  // storage order, row-major over the grid

  uint32_t grid_rows() const {
    return layout == Layout::Zigzag ? padded_rows / kSuperblockSize : rows;
  }
  uint32_t grid_cols() const {
    return layout == Layout::Zigzag ? cols : padded_cols / kSuperblockSize;
  }
  std::size_t superblock_index(std::size_t gr, std::size_t gc) const {
    return gr * grid_cols() + gc;
  }
};

// The 256-element slice a grid cell covers, zero-padded past the logical dims.
inline void extract_group_slice(const FloatMatrix& w, Layout layout, std::size_t gr,
                                std::size_t gc, std::span<float> slice) {
  if (layout == Layout::Zigzag) {
    // rows [256*gr, 256*gr+256) of column gc, zero past m
    for (std::size_t t = 0; t < kSuperblockSize; ++t) {
      const std::size_t r = gr * kSuperblockSize + t;
      slice[t] = r < w.rows ? w.at(r, gc) : 0.0f;
    }
  } else {
    // columns [256*gc, 256*gc+256) of row gr, zero past k
    for (std::size_t t = 0; t < kSuperblockSize; ++t) {
      const std::size_t c = gc * kSuperblockSize + t;
      slice[t] = c < w.cols ? w.at(gr, c) : 0.0f;
    }
  }
}

inline QuantMatrix quantize_matrix(const FloatMatrix& w, Layout layout,
                                   ThreadPool* pool = nullptr) {
  require(w.rows >= 1 && w.cols >= 1, "quantize_matrix: empty matrix");
  require(w.data.size() == std::size_t(w.rows) * w.cols, "quantize_matrix: bad data size");

  QuantMatrix q;
  q.layout = layout;
  q.rows = w.rows;
  q.cols = w.cols;
  q.padded_rows = layout == Layout::Zigzag
                      ? static_cast<uint32_t>(ceil_div(w.rows, kSuperblockSize) * kSuperblockSize)
                      : w.rows;
  q.padded_cols = layout == Layout::Zigzag
                      ? w.cols
                      : static_cast<uint32_t>(ceil_div(w.cols, kSuperblockSize) * kSuperblockSize);

  const std::size_t count = std::size_t(q.grid_rows()) * q.grid_cols();
  require(count <= static_cast<std::size_t>(UINT32_MAX),
          "quantize_matrix: superblock index space overflow");
  q.superblocks.resize(count);

  const std::size_t gcols = q.grid_cols();
  auto fit_one = [&](std::size_t i) {
    float slice[kSuperblockSize];
    extract_group_slice(w, layout, i / gcols, i % gcols, slice);
    q.superblocks[i] = quantize_superblock(slice);
  };
  if (pool != nullptr) {
    pool->parallel_for(count, fit_one);
  } else {
    for (std::size_t i = 0; i < count; ++i) fit_one(i);
  }
  return q;
}

inline FloatMatrix dequantize_matrix(const QuantMatrix& q) {
  FloatMatrix w(q.rows, q.cols);
  float slice[kSuperblockSize];
  for (std::size_t gr = 0; gr < q.grid_rows(); ++gr) {
    for (std::size_t gc = 0; gc < q.grid_cols(); ++gc) {
      dequantize_superblock(q.superblocks[q.superblock_index(gr, gc)], slice);
      if (q.layout == Layout::Zigzag) {
        for (std::size_t t = 0; t < kSuperblockSize; ++t) {
          const std::size_t r = gr * kSuperblockSize + t;
          if (r < q.rows) w.at(r, gc) = slice[t];
        }
      } else {
        for (std::size_t t = 0; t < kSuperblockSize; ++t) {
          const std::size_t c = gc * kSuperblockSize + t;
          if (c < q.cols) w.at(gr, c) = slice[t];
        }
      }
    }
  }
  return w;
}

// Layout conversion is a full dequantize + refit in the target layout. The
// 256-slices change axis, so this is lossy re-fitting, not a bit permutation.
inline QuantMatrix convert_layout(const QuantMatrix& q, Layout target,
                                  ThreadPool* pool = nullptr) {
  require(q.layout != target, "convert_layout: source layout equals target");
  return quantize_matrix(dequantize_matrix(q), target, pool);
}

}  // namespace spqt
