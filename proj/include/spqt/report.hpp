#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spqt/common.hpp"

namespace spqt {

enum class KernelId : uint8_t {
  Reference,
  RowQuantDense,
  RowQuantNaiveSparse,
  ZigzagDense,
  ZigzagSparseUnbalanced,
  ZigzagSparseBalanced,
};

inline const char* kernel_name(KernelId id) {
  switch (id) {
    case KernelId::Reference: return "reference";
    case KernelId::RowQuantDense: return "rowquant";
    case KernelId::RowQuantNaiveSparse: return "b1_naive";
    case KernelId::ZigzagDense: return "zigzag_dense";
    case KernelId::ZigzagSparseUnbalanced: return "b2_unbalanced";
    case KernelId::ZigzagSparseBalanced: return "b3_balanced";
  }
  return "unknown";
}

inline KernelId kernel_id_from_name(const std::string& name) {
  for (KernelId id : {KernelId::Reference, KernelId::RowQuantDense, KernelId::RowQuantNaiveSparse,
                      KernelId::ZigzagDense, KernelId::ZigzagSparseUnbalanced,
                      KernelId::ZigzagSparseBalanced}) {
    if (name == kernel_name(id)) return id;
  }
  throw SpqtError("unknown kernel name: " + name);
}

// Parallelism parameters: n1 virtual threadgroups per superblock-row, each
// with n2 virtual simdgroups. The n1*n2 virtual simdgroups of a superblock-row
// split its column work; worker_threads is the OS-level pool size underneath.
struct KernelConfig {
  uint32_t n1 = 8;
  uint32_t n2 = 2;
  uint32_t worker_threads = 0;  // 0 = hardware concurrency
  bool deterministic_reduction = true;
};

struct ExecutionReport {
  KernelId kernel_id = KernelId::Reference;
  uint32_t m = 0;
  uint32_t k = 0;
  KernelConfig config;
  uint32_t effective_workers = 1;  // virtual simdgroups per superblock-row after clamping
  bool config_clamped = false;

  // one entry per virtual simdgroup launched, row-major over
  // (superblock-row, simdgroup); superblock counts actually processed
  std::vector<uint32_t> per_simdgroup_superblocks;
  uint64_t total_superblock_macs = 0;
  uint64_t elementwise_branch_checks = 0;  // nonzero only for the naive sparse kernel
  uint64_t skipped_elements = 0;
  uint64_t n_ns = 0;  // active columns seen by this run
  uint64_t wall_clock_ns = 0;

  uint32_t superblock_rows() const {
    return effective_workers == 0 ? 0
                                  : static_cast<uint32_t>(per_simdgroup_superblocks.size() /
                                                          effective_workers);
  }

  uint32_t balance_min() const {
    return per_simdgroup_superblocks.empty()
               ? 0
               : *std::min_element(per_simdgroup_superblocks.begin(),
                                   per_simdgroup_superblocks.end());
  }
  uint32_t balance_max() const {
    return per_simdgroup_superblocks.empty()
               ? 0
               : *std::max_element(per_simdgroup_superblocks.begin(),
                                   per_simdgroup_superblocks.end());
  }
  double balance_mean() const {
    if (per_simdgroup_superblocks.empty()) return 0.0;
    uint64_t sum = 0;
    for (uint32_t v : per_simdgroup_superblocks) sum += v;
    return static_cast<double>(sum) / static_cast<double>(per_simdgroup_superblocks.size());
  }

  // max - min of per-simdgroup counts within the worst superblock-row
  uint32_t worst_row_spread() const {
    uint32_t worst = 0;
    const uint32_t w = effective_workers;
    if (w == 0) return 0;
    for (std::size_t base = 0; base + w <= per_simdgroup_superblocks.size(); base += w) {
      uint32_t lo = per_simdgroup_superblocks[base];
      uint32_t hi = lo;
      for (std::size_t g = 1; g < w; ++g) {
        lo = std::min(lo, per_simdgroup_superblocks[base + g]);
        hi = std::max(hi, per_simdgroup_superblocks[base + g]);
      }
      worst = std::max(worst, hi - lo);
    }
    return worst;
  }
};

inline nlohmann::json report_to_json(const ExecutionReport& r) {
  return nlohmann::json{
      {"kernel_id", kernel_name(r.kernel_id)},
      {"shape", {{"m", r.m}, {"k", r.k}}},
      {"config",
       {{"n1", r.config.n1},
        {"n2", r.config.n2},
        {"worker_threads", r.config.worker_threads},
        {"deterministic_reduction", r.config.deterministic_reduction},
        {"effective_workers", r.effective_workers},
        {"clamped", r.config_clamped}}},
      {"n_ns", r.n_ns},
      {"sparsity", r.k == 0 ? 0.0 : 1.0 - static_cast<double>(r.n_ns) / r.k},
      {"total_superblock_macs", r.total_superblock_macs},
      {"elementwise_branch_checks", r.elementwise_branch_checks},
      {"skipped_elements", r.skipped_elements},
      {"per_simdgroup",
       {{"min", r.balance_min()}, {"max", r.balance_max()}, {"mean", r.balance_mean()}}},
      {"wall_clock_ns", r.wall_clock_ns},
  };
}

}  // namespace spqt
