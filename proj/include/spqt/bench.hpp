#pragma once

// Benchmark harness. For each (shape, kernel, sparsity, config) it times
// warmup + repeated kernel runs on seeded inputs and emits one record with
// median/p10/p90 latency, exact work counters, load-balance statistics, and
// speedup against the rowquant dense baseline. Latency-derived fields carry
// machine_dependent = true; counter fields are exact and reproducible.
//
// Inputs are synthetic: quantized matrices are generated directly, hidden
// states are standard normal, and the sparsity threshold for level s is the
// nearest-rank quantile of |x| itself, so n_ns is exact to rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spqt/autotune.hpp"
#include "spqt/common.hpp"
#include "spqt/gemv.hpp"
#include "spqt/matrix.hpp"
#include "spqt/scan.hpp"
#include "spqt/synth.hpp"
#include "spqt/threshold.hpp"

namespace spqt {

struct BenchShape {
  uint32_t m = 0;
  uint32_t k = 0;
  auto operator<=>(const BenchShape&) const = default;
};

struct BenchSpec {
  std::vector<BenchShape> shapes;
  std::vector<std::string> kernels{"rowquant", "zigzag_dense", "b3_balanced"};
  std::vector<float> sparsity_levels{0.0f, 0.25f, 0.4f, 0.5f};
  uint32_t repeats = 20;
  uint32_t warmup = 3;
  uint64_t seed = 42;
  uint32_t worker_threads = 0;  // 0 = hardware concurrency
  std::optional<KernelConfig> config;            // fixed config for zigzag kernels
  std::map<BenchShape, KernelConfig> tuned;      // per-shape configs from an autotune manifest
  bool autotune_configs = false;                 // run autotune per shape instead

  void validate() const {
    require(!shapes.empty(), "bench: no shapes");
    require(repeats >= 1, "bench: repeats must be >= 1");
    require(!kernels.empty(), "bench: no kernels");
    for (const BenchShape& s : shapes) {
      require(s.m >= 1 && s.k >= 1, "bench: bad shape");
      require(s.m % kSuperblockSize == 0 && s.k % kSuperblockSize == 0,
              "bench: synthetic shapes must be multiples of 256");
    }
    for (float s : sparsity_levels) {
      require(s >= 0.0f && s < 1.0f, "bench: sparsity level must be in [0, 1)");
    }
  }
};

// m in {2048, 4096, 8192} x k in {1024, 2048, 4096, 8192, 16384}
inline std::vector<BenchShape> paper_grid_shapes() {
  std::vector<BenchShape> shapes;
  for (uint32_t m : {2048u, 4096u, 8192u}) {
    for (uint32_t k : {1024u, 2048u, 4096u, 8192u, 16384u}) shapes.push_back({m, k});
  }
  return shapes;
}

// Decode GEMV shapes of the Llama-2 7B/13B/70B and Llama-3 8B projections
// (attention q/o, grouped k/v where applicable, FFN up/gate and down).
inline std::vector<BenchShape> llama_shapes() {
  return {
      {4096, 4096},  {11008, 4096}, {4096, 11008},                 // Llama-2-7B
      {5120, 5120},  {13824, 5120}, {5120, 13824},                 // Llama-2-13B
      {8192, 8192},  {1024, 8192},  {28672, 8192}, {8192, 28672},  // Llama-2-70B
      {1024, 4096},  {14336, 4096}, {4096, 14336},                 // Llama-3-8B
  };
}

inline std::vector<BenchShape> preset_shapes(const std::string& name) {
  if (name == "paper-grid") return paper_grid_shapes();
  if (name == "llama-shapes") return llama_shapes();
  throw SpqtError("unknown shape preset: " + name);
}

namespace detail {

struct LatencyStats {
  double median_ns = 0.0;
  double p10_ns = 0.0;
  double p90_ns = 0.0;
};

inline LatencyStats latency_stats(std::vector<double> ns) {
  std::sort(ns.begin(), ns.end());
  auto pct = [&](double p) {
    const double pos = p * static_cast<double>(ns.size() - 1);
    return ns[static_cast<std::size_t>(std::lround(pos))];
  };
  return {pct(0.5), pct(0.1), pct(0.9)};
}

}  // namespace detail

inline void validate_bench_record(const nlohmann::json& rec) {
  auto need = [&](const char* key) {
    require(rec.contains(key), std::string("bench record missing field: ") + key);
  };
  for (const char* key : {"kernel", "m", "k", "layout", "sparsity_target", "measured_sparsity",
                          "n_ns", "config", "repeats", "warmup", "seed", "counters", "balance",
                          "latency", "speedup_vs_rowquant"}) {
    need(key);
  }
  require(rec["kernel"].is_string() && rec["m"].is_number_unsigned() &&
              rec["k"].is_number_unsigned(),
          "bench record: bad kernel/shape types");
  const auto& cfg = rec["config"];
  for (const char* key : {"n1", "n2", "worker_threads", "effective_workers", "clamped"}) {
    require(cfg.contains(key), std::string("bench record config missing: ") + key);
  }
  const auto& counters = rec["counters"];
  for (const char* key :
       {"total_superblock_macs", "elementwise_branch_checks", "skipped_elements",
        "mac_ratio_vs_dense"}) {
    require(counters.contains(key), std::string("bench record counters missing: ") + key);
  }
  const auto& balance = rec["balance"];
  for (const char* key : {"min", "max", "mean"}) {
    require(balance.contains(key), std::string("bench record balance missing: ") + key);
  }
  const auto& latency = rec["latency"];
  for (const char* key : {"median_ns", "p10_ns", "p90_ns", "machine_dependent"}) {
    require(latency.contains(key), std::string("bench record latency missing: ") + key);
  }
  require(latency["machine_dependent"].get<bool>(),
          "bench record: latency must be flagged machine dependent");
  const auto& speedup = rec["speedup_vs_rowquant"];
  require(speedup.contains("value") && speedup.contains("machine_dependent") &&
              speedup["machine_dependent"].get<bool>(),
          "bench record: speedup must be flagged machine dependent");
}

inline nlohmann::json run_bench(const BenchSpec& spec, ThreadPool& pool,
                                std::ostream* progress = nullptr) {
  spec.validate();
  std::vector<KernelId> kernel_ids;
  kernel_ids.reserve(spec.kernels.size());
  for (const std::string& name : spec.kernels) kernel_ids.push_back(kernel_id_from_name(name));

  nlohmann::json records = nlohmann::json::array();
  for (const BenchShape& shape : spec.shapes) {
    if (progress != nullptr) {
      *progress << "bench shape " << shape.m << "x" << shape.k << "\n" << std::flush;
    }
    const uint64_t shape_seed = spec.seed ^ (uint64_t(shape.m) << 32) ^ shape.k;

    const bool needs_zig = std::ranges::any_of(kernel_ids, [](KernelId id) {
      return id == KernelId::ZigzagDense || id == KernelId::ZigzagSparseUnbalanced ||
             id == KernelId::ZigzagSparseBalanced;
    });
    const bool needs_ref = std::ranges::any_of(
        kernel_ids, [](KernelId id) { return id == KernelId::Reference; });

    // rowquant dense always runs as the speedup baseline
    QuantMatrix q_row = random_quant_matrix(shape.m, shape.k, Layout::RowGrouped, shape_seed);
    QuantMatrix q_zig;
    if (needs_zig || needs_ref) {
      q_zig = random_quant_matrix(shape.m, shape.k, Layout::Zigzag, shape_seed + 1);
    }
    FloatMatrix w_ref;
    if (needs_ref) w_ref = dequantize_matrix(q_zig);

    KernelConfig cfg = spec.config.value_or(KernelConfig{});
    if (auto it = spec.tuned.find(shape); it != spec.tuned.end()) cfg = it->second;
    cfg.worker_threads = pool.size();

    const std::vector<float> x = random_normal_vector(shape.k, shape_seed + 2);
    if (spec.autotune_configs) {
      AutotuneOptions opts;
      opts.repeats = std::min<uint32_t>(spec.repeats, 5);
      const AutotuneResult tuned = autotune(
          needs_zig ? q_zig : random_quant_matrix(shape.m, shape.k, Layout::Zigzag, shape_seed + 1),
          x, default_tune_grid(), opts, pool);
      cfg = tuned.best;
    }

    // baseline latency (median over the same repeat count); two extra
    // warmups absorb page-in of the freshly synthesized matrix
    std::vector<double> baseline_ns;
    ExecutionReport baseline_report;
    for (uint32_t r = 0; r < spec.warmup + 2; ++r) gemv_rowquant_dense(q_row, x, pool);
    for (uint32_t r = 0; r < spec.repeats; ++r) {
      GemvResult res = gemv_rowquant_dense(q_row, x, pool);
      baseline_ns.push_back(static_cast<double>(res.report.wall_clock_ns));
      baseline_report = std::move(res.report);
    }
    const detail::LatencyStats baseline = detail::latency_stats(baseline_ns);
    const uint64_t dense_macs =
        uint64_t(shape.m) * ceil_div(shape.k, kSuperblockSize);  // rowquant grid
    const uint64_t dense_zig_macs =
        ceil_div(shape.m, kSuperblockSize) * uint64_t(shape.k);

    for (KernelId id : kernel_ids) {
      const bool sparse_kernel = id == KernelId::RowQuantNaiveSparse ||
                                 id == KernelId::ZigzagSparseUnbalanced ||
                                 id == KernelId::ZigzagSparseBalanced;
      const std::vector<float> levels =
          sparse_kernel ? spec.sparsity_levels : std::vector<float>{0.0f};
      for (float sparsity : levels) {
        float threshold = 0.0f;
        if (sparsity > 0.0f) {
          std::vector<float> mags(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) mags[i] = std::fabs(x[i]);
          threshold = calibrate_threshold(mags, sparsity).value;
        }
        ActiveIndexList idx;
        if (id == KernelId::ZigzagSparseBalanced) {
          idx = collect_indices_parallel(build_mask(x, threshold), kDefaultSegmentCapacity,
                                         CollectOrdering::Deterministic, pool);
        }

        auto run_once = [&]() -> GemvResult {
          switch (id) {
            case KernelId::Reference: {
              GemvResult r;
              const uint64_t t0 = detail::now_ns();
              r.y = gemv_reference(w_ref, x);
              r.report.kernel_id = KernelId::Reference;
              r.report.m = shape.m;
              r.report.k = shape.k;
              r.report.n_ns = shape.k;
              r.report.effective_workers = 1;
              r.report.wall_clock_ns = detail::now_ns() - t0;
              return r;
            }
            case KernelId::RowQuantDense: return gemv_rowquant_dense(q_row, x, pool);
            case KernelId::RowQuantNaiveSparse:
              return gemv_rowquant_naive_sparse(q_row, x, threshold, pool);
            case KernelId::ZigzagDense: return gemv_zigzag_dense(q_zig, x, cfg, pool);
            case KernelId::ZigzagSparseUnbalanced:
              return gemv_zigzag_sparse_unbalanced(q_zig, x, threshold, cfg, pool);
            case KernelId::ZigzagSparseBalanced:
              return gemv_zigzag_sparse_balanced(q_zig, x, idx, cfg, pool);
          }
          throw SpqtError("bench: unreachable kernel id");
        };

        ExecutionReport last;
        detail::LatencyStats stats;
        if (id == KernelId::RowQuantDense) {
          // the baseline run *is* this kernel; reuse its samples
          last = baseline_report;
          stats = baseline;
        } else {
          for (uint32_t r = 0; r < spec.warmup; ++r) run_once();
          std::vector<double> times;
          times.reserve(spec.repeats);
          for (uint32_t r = 0; r < spec.repeats; ++r) {
            GemvResult res = run_once();
            times.push_back(static_cast<double>(res.report.wall_clock_ns));
            last = std::move(res.report);
          }
          stats = detail::latency_stats(times);
        }

        const bool zig_family = id == KernelId::ZigzagDense ||
                                id == KernelId::ZigzagSparseUnbalanced ||
                                id == KernelId::ZigzagSparseBalanced;
        const uint64_t dense_equiv = zig_family ? dense_zig_macs : dense_macs;
        const double mac_ratio =
            dense_equiv == 0 ? 0.0
                             : static_cast<double>(last.total_superblock_macs) /
                                   static_cast<double>(dense_equiv);

        nlohmann::json rec{
            {"kernel", kernel_name(id)},
            {"m", shape.m},
            {"k", shape.k},
            {"layout", zig_family ? "zigzag" : "rowgrouped"},
            {"sparsity_target", sparsity},
            {"measured_sparsity",
             shape.k == 0 ? 0.0 : 1.0 - static_cast<double>(last.n_ns) / shape.k},
            {"n_ns", last.n_ns},
            {"config",
             {{"n1", cfg.n1},
              {"n2", cfg.n2},
              {"worker_threads", pool.size()},
              {"deterministic_reduction", cfg.deterministic_reduction},
              {"effective_workers", last.effective_workers},
              {"clamped", last.config_clamped}}},
            {"repeats", spec.repeats},
            {"warmup", spec.warmup},
            {"seed", spec.seed},
            {"counters",
             {{"total_superblock_macs", last.total_superblock_macs},
              {"elementwise_branch_checks", last.elementwise_branch_checks},
              {"skipped_elements", last.skipped_elements},
              {"mac_ratio_vs_dense", mac_ratio}}},
            {"balance",
             {{"min", last.balance_min()},
              {"max", last.balance_max()},
              {"mean", last.balance_mean()}}},
            {"latency",
             {{"median_ns", stats.median_ns},
              {"p10_ns", stats.p10_ns},
              {"p90_ns", stats.p90_ns},
              {"machine_dependent", true}}},
            {"speedup_vs_rowquant",
             {{"value", stats.median_ns == 0.0 ? 0.0 : baseline.median_ns / stats.median_ns},
              {"machine_dependent", true}}},
        };
        validate_bench_record(rec);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

inline std::string bench_csv(const nlohmann::json& records) {
  std::ostringstream out;
  out << "kernel,m,k,layout,sparsity_target,measured_sparsity,n_ns,n1,n2,worker_threads,"
         "effective_workers,median_ns,p10_ns,p90_ns,total_superblock_macs,"
         "elementwise_branch_checks,skipped_elements,mac_ratio_vs_dense,"
         "speedup_vs_rowquant,balance_min,balance_max,balance_mean\n";
  out.precision(10);
  for (const auto& r : records) {
    out << r["kernel"].get<std::string>() << ',' << r["m"] << ',' << r["k"] << ','
        << r["layout"].get<std::string>() << ',' << r["sparsity_target"] << ','
        << r["measured_sparsity"] << ',' << r["n_ns"] << ',' << r["config"]["n1"] << ','
        << r["config"]["n2"] << ',' << r["config"]["worker_threads"] << ','
        << r["config"]["effective_workers"] << ',' << r["latency"]["median_ns"] << ','
        << r["latency"]["p10_ns"] << ',' << r["latency"]["p90_ns"] << ','
        << r["counters"]["total_superblock_macs"] << ','
        << r["counters"]["elementwise_branch_checks"] << ','
        << r["counters"]["skipped_elements"] << ',' << r["counters"]["mac_ratio_vs_dense"] << ','
        << r["speedup_vs_rowquant"]["value"] << ',' << r["balance"]["min"] << ','
        << r["balance"]["max"] << ',' << r["balance"]["mean"] << "\n";
  }
  return out.str();
}

}  // namespace spqt
