#pragma once

// Sparse index collection: turn an activity bitmask over the hidden state
// into a compact array of active entry indices.
//
// The parallel collector splits the mask into fixed-capacity segments. Each
// segment runs a work-efficient Blelloch exclusive prefix sum (up-sweep /
// down-sweep over a power-of-two tree) to get local output positions, then
// scatters its set-bit indices at local_prefix + segment_base.
//
// Two ways to assign segment bases:
//   Deterministic    - base = prefix sum of earlier segments' totals; the
//                      output is globally ascending and equals the sequential
//                      collector exactly.
//   ReservationOrder - each segment atomically reserves base = fetch_add(total)
//                      when it finishes, so segments land in completion order.
//                      The output is a permutation of the sequential result
//                      made of ascending within-segment runs.

#include <atomic>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/thread_pool.hpp"

namespace spqt {

inline constexpr std::size_t kDefaultSegmentCapacity = 1024;
inline constexpr std::size_t kMaxSegmentCapacity = 65536;

struct ActiveIndexList {
  std::vector<uint32_t> indices;
  uint32_t source_len = 0;

  std::size_t n_ns() const { return indices.size(); }
};

enum class CollectOrdering : uint8_t { Deterministic = 0, ReservationOrder = 1 };

inline ActiveIndexList collect_indices_sequential(std::span<const uint8_t> mask) {
  ActiveIndexList out;
  out.source_len = static_cast<uint32_t>(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.indices.push_back(static_cast<uint32_t>(i));
  }
  return out;
}

struct ScanResult {
  std::vector<uint32_t> prefix;  // prefix[i] = sum of bits[0..i)
  uint32_t total = 0;
};

inline ScanResult blelloch_exclusive_scan(std::span<const uint8_t> bits,
                                          std::size_t segment_capacity = kDefaultSegmentCapacity) {
  require(bits.size() <= segment_capacity, "blelloch_exclusive_scan: segment exceeds capacity");
  ScanResult result;
  if (bits.empty()) return result;

  const std::size_t padded = std::bit_ceil(bits.size());
  std::vector<uint32_t> tree(padded, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) tree[i] = bits[i] ? 1 : 0;

  // up-sweep: build partial sums bottom-up
  for (std::size_t stride = 1; stride < padded; stride <<= 1) {
    for (std::size_t i = 2 * stride - 1; i < padded; i += 2 * stride) {
      tree[i] += tree[i - stride];
    }
  }
  result.total = tree[padded - 1];
  tree[padded - 1] = 0;
  // down-sweep: propagate exclusive prefixes top-down
  for (std::size_t stride = padded >> 1; stride >= 1; stride >>= 1) {
    for (std::size_t i = 2 * stride - 1; i < padded; i += 2 * stride) {
      const uint32_t left = tree[i - stride];
      tree[i - stride] = tree[i];
      tree[i] += left;
    }
  }
  tree.resize(bits.size());
  result.prefix = std::move(tree);
  return result;
}

inline ActiveIndexList collect_indices_parallel(std::span<const uint8_t> mask,
                                                std::size_t segment_capacity,
                                                CollectOrdering ordering, ThreadPool& pool) {
  require(segment_capacity >= 2 && segment_capacity <= kMaxSegmentCapacity &&
              std::has_single_bit(segment_capacity),
          "collect_indices_parallel: segment capacity must be a power of two in [2, 65536]");

  ActiveIndexList out;
  out.source_len = static_cast<uint32_t>(mask.size());
  if (mask.empty()) return out;

  const std::size_t nseg = ceil_div(mask.size(), segment_capacity);
  auto segment = [&](std::size_t s) {
    const std::size_t base = s * segment_capacity;
    return mask.subspan(base, std::min(segment_capacity, mask.size() - base));
  };

  if (ordering == CollectOrdering::Deterministic) {
    std::vector<ScanResult> scans(nseg);
    pool.parallel_for(nseg,
                      [&](std::size_t s) { scans[s] = blelloch_exclusive_scan(segment(s)); });
    std::vector<uint32_t> bases(nseg, 0);
    uint32_t running = 0;
    for (std::size_t s = 0; s < nseg; ++s) {
      bases[s] = running;
      running += scans[s].total;
    }
    out.indices.resize(running);
    pool.parallel_for(nseg, [&](std::size_t s) {
      const std::span<const uint8_t> seg = segment(s);
      const std::size_t offset = s * segment_capacity;
      for (std::size_t i = 0; i < seg.size(); ++i) {
        if (seg[i]) {
          out.indices[bases[s] + scans[s].prefix[i]] = static_cast<uint32_t>(offset + i);
        }
      }
    });
  } else {
    out.indices.resize(mask.size());
    std::atomic<uint32_t> cursor{0};
    pool.parallel_for(nseg, [&](std::size_t s) {
      const std::span<const uint8_t> seg = segment(s);
      const ScanResult scan = blelloch_exclusive_scan(seg);
      const uint32_t base = cursor.fetch_add(scan.total, std::memory_order_relaxed);
      const std::size_t offset = s * segment_capacity;
      for (std::size_t i = 0; i < seg.size(); ++i) {
        if (seg[i]) {
          out.indices[base + scan.prefix[i]] = static_cast<uint32_t>(offset + i);
        }
      }
    });
    out.indices.resize(cursor.load());
  }
  return out;
}

}  // namespace spqt
