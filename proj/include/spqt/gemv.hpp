#pragma once

// GEMV kernel family over quantized weights.
//
// The zigzag kernels model the GPU execution scheme on a CPU worker pool:
// each superblock-row (256 output rows) is processed by n1*n2 virtual
// simdgroups that split the row's column work, accumulate private 256-float
// partial vectors, and reduce them into the output in ascending simdgroup
// order once all partials for the row are complete. With deterministic
// reduction (the default) the output is bit-identical for any pool size.
//
// Variants:
//   rowquant       dense baseline over the row-grouped layout
//   b1_naive       row-grouped with a per-element |x_j| >= threshold guard
//   zigzag_dense   zigzag layout, static column segments per simdgroup
//   b2_unbalanced  zigzag, skips sub-threshold columns inside static segments
//   b3_balanced    zigzag, partitions the active-index array evenly instead,
//                  so per-simdgroup superblock counts differ by at most one

#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/matrix.hpp"
#include "spqt/report.hpp"
#include "spqt/scan.hpp"
#include "spqt/thread_pool.hpp"

namespace spqt {

// Equivalence tolerance against the 64-bit dequantize-then-reference oracle:
// identical products, differing 32-bit summation order.
inline constexpr double kOracleRelTol = 1e-4;
inline constexpr double kOracleAbsFloor = 1e-6;

struct IndexRange {
  uint32_t begin = 0;
  uint32_t end = 0;
  uint32_t size() const { return end - begin; }
};

// Split [0, count) into n_workers contiguous ranges with sizes differing by
// at most one; the larger ranges go to the lower worker indices.
inline std::vector<IndexRange> partition_even(std::size_t count, unsigned n_workers) {
  require(n_workers >= 1, "partition: zero workers");
  std::vector<IndexRange> ranges(n_workers);
  const std::size_t base = count / n_workers;
  const std::size_t extra = count % n_workers;
  uint32_t at = 0;
  for (unsigned w = 0; w < n_workers; ++w) {
    const auto size = static_cast<uint32_t>(base + (w < extra ? 1 : 0));
    ranges[w] = {at, at + size};
    at += size;
  }
  return ranges;
}

inline std::vector<IndexRange> partition_indices(const ActiveIndexList& idx, unsigned n_workers) {
  return partition_even(idx.indices.size(), n_workers);
}

struct GemvResult {
  std::vector<float> y;
  ExecutionReport report;
};

namespace detail {

inline void validate_hidden_state(std::span<const float> x) {
  for (float v : x) require(std::isfinite(v), "gemv: non-finite hidden state entry");
}

// y_partial[t] += dequant(sb)[t] * xc for all 256 lanes
inline void accumulate_superblock_column(const QuantSuperblock& sb, float xc, float* acc) {
  const float d = sb.super_scale();
  const float dmin = sb.super_min();
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    const float dsc = d * static_cast<float>(sb.block_scales[b]);
    const float dmn = dmin * static_cast<float>(sb.block_mins[b]);
    const uint8_t* cp = sb.codes.data() + b * (kBlockSize / 2);
    float* a = acc + b * kBlockSize;
    for (std::size_t i = 0; i < kBlockSize / 2; ++i) {
      a[2 * i] += (dsc * static_cast<float>(cp[i] & 0x0f) - dmn) * xc;
      a[2 * i + 1] += (dsc * static_cast<float>(cp[i] >> 4) - dmn) * xc;
    }
  }
}

inline float superblock_dot(const QuantSuperblock& sb, const float* x) {
  const float d = sb.super_scale();
  const float dmin = sb.super_min();
  float sum = 0.0f;
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    const float dsc = d * static_cast<float>(sb.block_scales[b]);
    const float dmn = dmin * static_cast<float>(sb.block_mins[b]);
    const uint8_t* cp = sb.codes.data() + b * (kBlockSize / 2);
    const float* xs = x + b * kBlockSize;
    for (std::size_t i = 0; i < kBlockSize / 2; ++i) {
      sum += (dsc * static_cast<float>(cp[i] & 0x0f) - dmn) * xs[2 * i];
      sum += (dsc * static_cast<float>(cp[i] >> 4) - dmn) * xs[2 * i + 1];
    }
  }
  return sum;
}

// Same math as superblock_dot with every element multiply guarded by the
// sparsity threshold; with threshold 0 the arithmetic sequence is identical.
inline float superblock_dot_guarded(const QuantSuperblock& sb, const float* x, float threshold,
                                    uint64_t& skipped) {
  const float d = sb.super_scale();
  const float dmin = sb.super_min();
  float sum = 0.0f;
  for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
    const float dsc = d * static_cast<float>(sb.block_scales[b]);
    const float dmn = dmin * static_cast<float>(sb.block_mins[b]);
    const uint8_t* cp = sb.codes.data() + b * (kBlockSize / 2);
    const float* xs = x + b * kBlockSize;
    for (std::size_t i = 0; i < kBlockSize / 2; ++i) {
      if (std::fabs(xs[2 * i]) >= threshold) {
        sum += (dsc * static_cast<float>(cp[i] & 0x0f) - dmn) * xs[2 * i];
      } else {
        ++skipped;
      }
      if (std::fabs(xs[2 * i + 1]) >= threshold) {
        sum += (dsc * static_cast<float>(cp[i] >> 4) - dmn) * xs[2 * i + 1];
      } else {
        ++skipped;
      }
    }
  }
  return sum;
}

inline uint64_t now_ns() {
  return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                   std::chrono::steady_clock::now().time_since_epoch())
                                   .count());
}

// Shared zigzag execution: `visit(sb_row, g, emit)` must call emit(c) for
// every column assigned to virtual simdgroup g of that superblock-row, in
// ascending column order for deterministic runs.
template <typename ColumnVisitor>
GemvResult zigzag_execute(const QuantMatrix& q, std::span<const float> x, const KernelConfig& cfg,
                          ThreadPool& pool, KernelId id, uint64_t n_ns, ColumnVisitor&& visit) {
  require(q.layout == Layout::Zigzag, "zigzag kernel requires a zigzag-layout matrix");
  require(x.size() == q.cols, "gemv: dimension mismatch");
  require(cfg.n1 >= 1 && cfg.n2 >= 1, "gemv: n1 and n2 must be positive");
  validate_hidden_state(x);

  const uint64_t start = now_ns();
  const uint32_t sb_rows = q.padded_rows / kSuperblockSize;
  const uint64_t requested = static_cast<uint64_t>(cfg.n1) * cfg.n2;
  const bool clamped = requested > q.cols;
  const uint32_t workers = clamped ? q.cols : static_cast<uint32_t>(requested);

  const std::size_t tasks = std::size_t(sb_rows) * workers;
  std::vector<uint32_t> counts(tasks, 0);
  std::vector<float> y(q.rows, 0.0f);

  auto run_task = [&](std::size_t t, float* acc) {
    const std::size_t sb_row = t / workers;
    const auto g = static_cast<unsigned>(t % workers);
    const QuantSuperblock* row_sb = q.superblocks.data() + sb_row * q.cols;
    uint32_t processed = 0;
    visit(sb_row, g, [&](uint32_t c) {
      accumulate_superblock_column(row_sb[c], x[c], acc);
      ++processed;
    });
    counts[t] = processed;
  };

  if (cfg.deterministic_reduction) {
    std::vector<float> partials(tasks * kSuperblockSize, 0.0f);
    pool.parallel_for(tasks,
                      [&](std::size_t t) { run_task(t, partials.data() + t * kSuperblockSize); });
    // barrier between phases; reduction in ascending simdgroup order
    pool.parallel_for(sb_rows, [&](std::size_t sb_row) {
      float row[kSuperblockSize] = {0.0f};
      for (uint32_t g = 0; g < workers; ++g) {
        const float* acc = partials.data() + (sb_row * workers + g) * kSuperblockSize;
        for (std::size_t t = 0; t < kSuperblockSize; ++t) row[t] += acc[t];
      }
      const std::size_t r0 = sb_row * kSuperblockSize;
      for (std::size_t t = 0; t < kSuperblockSize && r0 + t < q.rows; ++t) y[r0 + t] = row[t];
    });
  } else {
    // completion-order reduction under a per-row lock
    std::vector<float> rows(std::size_t(sb_rows) * kSuperblockSize, 0.0f);
    std::vector<std::mutex> locks(sb_rows);
    pool.parallel_for(tasks, [&](std::size_t t) {
      float acc[kSuperblockSize] = {0.0f};
      run_task(t, acc);
      const std::size_t sb_row = t / workers;
      std::scoped_lock lk(locks[sb_row]);
      float* row = rows.data() + sb_row * kSuperblockSize;
      for (std::size_t i = 0; i < kSuperblockSize; ++i) row[i] += acc[i];
    });
    for (std::size_t sb_row = 0; sb_row < sb_rows; ++sb_row) {
      const std::size_t r0 = sb_row * kSuperblockSize;
      for (std::size_t t = 0; t < kSuperblockSize && r0 + t < q.rows; ++t) {
        y[r0 + t] = rows[sb_row * kSuperblockSize + t];
      }
    }
  }

  GemvResult result;
  result.y = std::move(y);
  ExecutionReport& r = result.report;
  r.kernel_id = id;
  r.m = q.rows;
  r.k = q.cols;
  r.config = cfg;
  r.effective_workers = workers;
  r.config_clamped = clamped;
  r.per_simdgroup_superblocks = std::move(counts);
  for (uint32_t c : r.per_simdgroup_superblocks) r.total_superblock_macs += c;
  r.n_ns = n_ns;
  r.wall_clock_ns = now_ns() - start;
  return result;
}

}  // namespace detail

// Full-precision oracle: 64-bit accumulation, rounded to 32-bit on output.
inline std::vector<float> gemv_reference(const FloatMatrix& w, std::span<const float> x) {
  require(w.cols == x.size(), "gemv_reference: dimension mismatch");
  std::vector<float> y(w.rows);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const float* row = w.data.data() + r * w.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) {
      acc += static_cast<double>(row[c]) * static_cast<double>(x[c]);
    }
    y[r] = static_cast<float>(acc);
  }
  return y;
}

// Dense baseline over the row-grouped layout: per row, superblocks processed
// in ascending order, one 32-bit partial per superblock. Rows are scheduled
// four per task; the result does not depend on the schedule.
inline GemvResult gemv_rowquant_dense(const QuantMatrix& q, std::span<const float> x,
                                      ThreadPool& pool) {
  require(q.layout == Layout::RowGrouped, "rowquant kernel requires a row-grouped matrix");
  require(x.size() == q.cols, "gemv: dimension mismatch");
  detail::validate_hidden_state(x);

  const uint64_t start = detail::now_ns();
  const uint32_t grid_cols = q.grid_cols();
  std::vector<float> xpad(q.padded_cols, 0.0f);
  std::copy(x.begin(), x.end(), xpad.begin());

  const std::size_t tasks = ceil_div(q.rows, 4);
  std::vector<uint32_t> counts(tasks, 0);
  std::vector<float> y(q.rows, 0.0f);
  pool.parallel_for(tasks, [&](std::size_t t) {
    const std::size_t r_end = std::min<std::size_t>(q.rows, 4 * (t + 1));
    uint32_t processed = 0;
    for (std::size_t r = 4 * t; r < r_end; ++r) {
      const QuantSuperblock* row_sb = q.superblocks.data() + r * grid_cols;
      float acc = 0.0f;
      for (std::size_t c = 0; c < grid_cols; ++c) {
        acc += detail::superblock_dot(row_sb[c], xpad.data() + c * kSuperblockSize);
      }
      y[r] = acc;
      processed += grid_cols;
    }
    counts[t] = processed;
  });

  GemvResult result;
  result.y = std::move(y);
  ExecutionReport& r = result.report;
  r.kernel_id = KernelId::RowQuantDense;
  r.m = q.rows;
  r.k = q.cols;
  r.effective_workers = 1;
  r.per_simdgroup_superblocks = std::move(counts);
  r.total_superblock_macs = uint64_t(q.rows) * grid_cols;
  r.n_ns = q.cols;
  r.wall_clock_ns = detail::now_ns() - start;
  return result;
}

// Naive sparse baseline (B1): identical math to the dense rowquant kernel
// with every element multiply guarded by a mask check. The guard count is
// m * padded_k regardless of the data; on SIMT hardware this fine-grained
// branching is what stalls execution, here it is surfaced as a counter.
inline GemvResult gemv_rowquant_naive_sparse(const QuantMatrix& q, std::span<const float> x,
                                             float threshold, ThreadPool& pool) {
  require(q.layout == Layout::RowGrouped, "rowquant kernel requires a row-grouped matrix");
  require(x.size() == q.cols, "gemv: dimension mismatch");
  detail::validate_hidden_state(x);

  const uint64_t start = detail::now_ns();
  const uint32_t grid_cols = q.grid_cols();
  std::vector<float> xpad(q.padded_cols, 0.0f);
  std::copy(x.begin(), x.end(), xpad.begin());

  uint64_t n_ns = 0;
  for (float v : x) {
    if (std::fabs(v) >= threshold) ++n_ns;
  }

  const std::size_t tasks = ceil_div(q.rows, 4);
  std::vector<uint32_t> counts(tasks, 0);
  std::vector<uint64_t> skipped(tasks, 0);
  std::vector<float> y(q.rows, 0.0f);
  pool.parallel_for(tasks, [&](std::size_t t) {
    const std::size_t r_end = std::min<std::size_t>(q.rows, 4 * (t + 1));
    uint32_t processed = 0;
    uint64_t local_skipped = 0;
    for (std::size_t r = 4 * t; r < r_end; ++r) {
      const QuantSuperblock* row_sb = q.superblocks.data() + r * grid_cols;
      float acc = 0.0f;
      for (std::size_t c = 0; c < grid_cols; ++c) {
        acc += detail::superblock_dot_guarded(row_sb[c], xpad.data() + c * kSuperblockSize,
                                              threshold, local_skipped);
      }
      y[r] = acc;
      processed += grid_cols;
    }
    counts[t] = processed;
    skipped[t] = local_skipped;
  });

  GemvResult result;
  result.y = std::move(y);
  ExecutionReport& r = result.report;
  r.kernel_id = KernelId::RowQuantNaiveSparse;
  r.m = q.rows;
  r.k = q.cols;
  r.effective_workers = 1;
  r.per_simdgroup_superblocks = std::move(counts);
  r.total_superblock_macs = uint64_t(q.rows) * grid_cols;
  r.elementwise_branch_checks = uint64_t(q.rows) * q.padded_cols;
  for (uint64_t s : skipped) r.skipped_elements += s;
  r.n_ns = n_ns;
  r.wall_clock_ns = detail::now_ns() - start;
  return result;
}

inline GemvResult gemv_zigzag_dense(const QuantMatrix& q, std::span<const float> x,
                                    const KernelConfig& cfg, ThreadPool& pool) {
  const uint64_t requested = uint64_t(cfg.n1) * cfg.n2;
  const uint32_t workers =
      requested > q.cols ? q.cols : static_cast<uint32_t>(std::max<uint64_t>(1, requested));
  const std::vector<IndexRange> segments = partition_even(q.cols, workers);
  return detail::zigzag_execute(q, x, cfg, pool, KernelId::ZigzagDense, q.cols,
                                [&](std::size_t, unsigned g, auto&& emit) {
                                  for (uint32_t c = segments[g].begin; c < segments[g].end; ++c) {
                                    emit(c);
                                  }
                                });
}

// B2: static column segments as in the dense kernel, sub-threshold columns
// skipped on the fly. Per-simdgroup counts expose the resulting imbalance.
inline GemvResult gemv_zigzag_sparse_unbalanced(const QuantMatrix& q, std::span<const float> x,
                                                float threshold, const KernelConfig& cfg,
                                                ThreadPool& pool) {
  require(x.size() == q.cols, "gemv: dimension mismatch");
  const uint64_t requested = uint64_t(cfg.n1) * cfg.n2;
  const uint32_t workers =
      requested > q.cols ? q.cols : static_cast<uint32_t>(std::max<uint64_t>(1, requested));
  const std::vector<IndexRange> segments = partition_even(q.cols, workers);
  uint64_t n_ns = 0;
  for (float v : x) {
    if (std::fabs(v) >= threshold) ++n_ns;
  }
  return detail::zigzag_execute(q, x, cfg, pool, KernelId::ZigzagSparseUnbalanced, n_ns,
                                [&](std::size_t, unsigned g, auto&& emit) {
                                  for (uint32_t c = segments[g].begin; c < segments[g].end; ++c) {
                                    if (std::fabs(x[c]) >= threshold) emit(c);
                                  }
                                });
}

// Full kernel (B3): the active-index array is partitioned evenly across the
// virtual simdgroups of each superblock-row, so per-simdgroup superblock
// counts differ by at most one and exactly n_ns superblock MACs run per
// superblock-row.
inline GemvResult gemv_zigzag_sparse_balanced(const QuantMatrix& q, std::span<const float> x,
                                              const ActiveIndexList& idx, const KernelConfig& cfg,
                                              ThreadPool& pool) {
  for (std::size_t i = 0; i < idx.indices.size(); ++i) {
    require(idx.indices[i] < q.cols, "balanced kernel: active index out of range");
    if (cfg.deterministic_reduction && i > 0) {
      require(idx.indices[i - 1] < idx.indices[i],
              "balanced kernel: active indices must be strictly ascending in "
              "deterministic mode");
    }
  }
  const uint64_t requested = uint64_t(cfg.n1) * cfg.n2;
  const uint32_t workers =
      requested > q.cols ? q.cols : static_cast<uint32_t>(std::max<uint64_t>(1, requested));
  const std::vector<IndexRange> ranges = partition_even(idx.indices.size(), workers);
  return detail::zigzag_execute(q, x, cfg, pool, KernelId::ZigzagSparseBalanced,
                                idx.indices.size(),
                                [&](std::size_t, unsigned g, auto&& emit) {
                                  for (uint32_t t = ranges[g].begin; t < ranges[g].end; ++t) {
                                    emit(idx.indices[t]);
                                  }
                                });
}

}  // namespace spqt
