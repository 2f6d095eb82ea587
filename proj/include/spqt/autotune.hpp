#pragma once

// Grid search over (n1, n2) for the zigzag dense kernel.
//
// Wall-clock mode runs each candidate and keeps the one with the lowest
// median latency. Virtual-cost mode instead evaluates a deterministic model
// counting MACs, synchronization events, and partial-buffer bytes with fixed
// weights; it never executes the kernel, so results are stable across
// machines. Cross-threadgroup synchronization is weighted heavier than
// intra-threadgroup synchronization.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spqt/common.hpp"
#include "spqt/gemv.hpp"
#include "spqt/matrix.hpp"
#include "spqt/report.hpp"
#include "spqt/thread_pool.hpp"

namespace spqt {

enum class TuneMode : uint8_t { WallClock = 0, VirtualCost = 1 };

struct CostWeights {
  double mac = 1.0;          // per element multiply-accumulate
  double sync_cross = 4096.0;  // per cross-threadgroup synchronization
  double sync_intra = 1024.0;  // per intra-threadgroup synchronization
  double byte = 0.5;           // per partial-buffer byte written + read
};

struct TuneCandidate {
  uint32_t n1 = 1;
  uint32_t n2 = 1;
};

inline std::vector<TuneCandidate> default_tune_grid() {
  std::vector<TuneCandidate> grid;
  for (uint32_t n1 : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    for (uint32_t n2 : {1u, 2u, 4u}) grid.push_back({n1, n2});
  }
  return grid;
}

inline double virtual_cost(uint32_t m, uint32_t k, uint64_t active_cols, const TuneCandidate& c,
                           const CostWeights& w) {
  const auto sb_rows = static_cast<double>(ceil_div(m, kSuperblockSize));
  const uint64_t requested = uint64_t(c.n1) * c.n2;
  const double workers = static_cast<double>(std::min<uint64_t>(requested, k));
  const double macs = sb_rows * static_cast<double>(active_cols) * kSuperblockSize;
  const double cross = sb_rows * (c.n1 - 1);
  const double intra = sb_rows * c.n1 * (c.n2 - 1);
  const double partial_bytes = sb_rows * workers * kSuperblockSize * 4.0 * 2.0;
  return macs * w.mac + cross * w.sync_cross + intra * w.sync_intra + partial_bytes * w.byte;
}

struct AutotuneOptions {
  TuneMode mode = TuneMode::WallClock;
  uint32_t repeats = 20;
  uint32_t warmup = 1;
  CostWeights weights;
};

struct TuneEntry {
  TuneCandidate candidate;
  double median_ns = 0.0;  // wall-clock mode only
  double cost = 0.0;       // virtual-cost mode only
};

struct AutotuneResult {
  KernelConfig best;
  std::vector<TuneEntry> table;
  TuneMode mode = TuneMode::WallClock;
  std::string annotation;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline AutotuneResult autotune(const QuantMatrix& q, std::span<const float> x,
                               const std::vector<TuneCandidate>& grid,
                               const AutotuneOptions& opts, ThreadPool& pool) {
  require(!grid.empty(), "autotune: empty candidate grid");
  require(opts.repeats >= 1, "autotune: repeats must be positive");

  AutotuneResult result;
  result.mode = opts.mode;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TuneEntry entry;
    entry.candidate = grid[i];
    if (opts.mode == TuneMode::VirtualCost) {
      entry.cost = virtual_cost(q.rows, q.cols, q.cols, grid[i], opts.weights);
    } else {
      KernelConfig cfg{grid[i].n1, grid[i].n2, pool.size(), true};
      for (uint32_t w = 0; w < opts.warmup; ++w) gemv_zigzag_dense(q, x, cfg, pool);
      std::vector<double> times;
      times.reserve(opts.repeats);
      for (uint32_t r = 0; r < opts.repeats; ++r) {
        times.push_back(static_cast<double>(gemv_zigzag_dense(q, x, cfg, pool).report.wall_clock_ns));
      }
      entry.median_ns = detail::median_of(std::move(times));
    }
    result.table.push_back(entry);
  }

  auto metric = [&](const TuneEntry& e) {
    return opts.mode == TuneMode::VirtualCost ? e.cost : e.median_ns;
  };
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (metric(result.table[i]) < metric(result.table[best_index])) best_index = i;
  }

  result.best = KernelConfig{result.table[best_index].candidate.n1,
                             result.table[best_index].candidate.n2, pool.size(), true};

  std::ostringstream note;
  note << "best config (n1=" << result.best.n1 << ", n2=" << result.best.n2 << ") for " << q.rows
       << "x" << q.cols << "; simdgroup counts of 2-4 usually balance intra-row parallelism "
       << "against reduction overhead (observed best n2=" << result.best.n2
       << "), and larger k favors larger threadgroup counts";
  result.annotation = note.str();
  return result;
}

inline nlohmann::json autotune_to_json(const AutotuneResult& r, uint32_t m, uint32_t k) {
  nlohmann::json table = nlohmann::json::array();
  for (const TuneEntry& e : r.table) {
    nlohmann::json row{{"n1", e.candidate.n1}, {"n2", e.candidate.n2}};
    if (r.mode == TuneMode::WallClock) {
      row["median_ns"] = e.median_ns;
      row["machine_dependent"] = true;
    } else {
      row["cost"] = e.cost;
      row["machine_dependent"] = false;
    }
    table.push_back(row);
  }
  return nlohmann::json{
      {"shape", {{"m", m}, {"k", k}}},
      {"mode", r.mode == TuneMode::WallClock ? "wallclock" : "virtual-cost"},
      {"best", {{"n1", r.best.n1}, {"n2", r.best.n2}}},
      {"table", table},
      {"annotation", r.annotation},
  };
}

}  // namespace spqt
