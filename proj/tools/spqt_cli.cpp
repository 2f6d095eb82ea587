// spqt: quantize/convert weight matrices, calibrate sparsity thresholds,
// verify containers against their float source, and benchmark the GEMV
// kernel family.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spqt/spqt.hpp"

namespace {

using nlohmann::json;

struct GlobalOptions {
  uint64_t seed = 42;
  uint32_t threads = 0;  // 0 = hardware concurrency
  std::string json_out;
  std::string csv_out;
};

std::pair<uint32_t, uint32_t> parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw spqt::SpqtError("expected MxK, got: " + text);
  const long m = std::stol(text.substr(0, x));
  const long k = std::stol(text.substr(x + 1));
  if (m < 1 || k < 1) throw spqt::SpqtError("dims must be positive: " + text);
  return {static_cast<uint32_t>(m), static_cast<uint32_t>(k)};
}

spqt::Layout parse_layout(const std::string& name) {
  if (name == "zigzag") return spqt::Layout::Zigzag;
  if (name == "rowgrouped") return spqt::Layout::RowGrouped;
  throw spqt::SpqtError("unknown layout: " + name + " (expected zigzag or rowgrouped)");
}

std::vector<float> parse_float_list(const std::string& text) {
  std::vector<float> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stof(item));
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double round_trip_rmse(const spqt::QuantMatrix& q, const spqt::FloatMatrix& w) {
  const spqt::FloatMatrix back = spqt::dequantize_matrix(q);
  double se = 0.0;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double e = double(back.data[i]) - double(w.data[i]);
    se += e * e;
  }
  return std::sqrt(se / double(w.data.size()));
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) throw spqt::SpqtError("cannot open for writing: " + path);
  out << text;
}

// ---------------------------------------------------------------------------
// quantize

int cmd_quantize(const GlobalOptions& opts, const std::string& input, const std::string& dims,
                 const std::string& layout_name, const std::string& output) {
  const auto [m, k] = parse_dims(dims);
  const spqt::Layout layout = parse_layout(layout_name);
  const spqt::FloatMatrix w = spqt::load_float_matrix(input, m, k);
  spqt::ThreadPool pool(opts.threads);
  const spqt::QuantMatrix q = spqt::quantize_matrix(w, layout, &pool);
  spqt::save_quant_matrix(output, q);
  std::cout << "quantized " << m << "x" << k << " (" << spqt::layout_name(layout) << ", "
            << q.superblocks.size() << " superblocks) -> " << output << "\n";
  std::cout << "round-trip rmse = " << round_trip_rmse(q, w) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// convert

int cmd_convert(const GlobalOptions& opts, const std::string& input,
                const std::string& target_name, const std::string& output) {
  const spqt::QuantMatrix q = spqt::load_quant_matrix(input);
  const spqt::Layout target = parse_layout(target_name);
  spqt::ThreadPool pool(opts.threads);
  const spqt::QuantMatrix converted = spqt::convert_layout(q, target, &pool);
  spqt::save_quant_matrix(output, converted);
  std::cout << "converted " << q.rows << "x" << q.cols << " from "
            << spqt::layout_name(q.layout) << " to " << spqt::layout_name(target)
            << " (lossy re-fit) -> " << output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

int cmd_calibrate(const std::vector<std::string>& sample_specs, const std::string& mode_name,
                  const std::vector<std::string>& group_specs, const std::string& sparsity_list,
                  const std::string& output) {
  if (sample_specs.empty()) throw spqt::SpqtError("calibrate: at least one --samples required");
  std::map<std::string, std::vector<float>> samples;
  for (const std::string& spec : sample_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw spqt::SpqtError("expected label=path in --samples, got: " + spec);
    }
    const std::string label = spec.substr(0, eq);
    std::vector<float> values = spqt::read_f32_file(spec.substr(eq + 1));
    if (values.empty()) throw spqt::SpqtError("empty sample file for tensor '" + label + "'");
    for (float& v : values) v = std::fabs(v);  // samples are treated as magnitudes
    samples[label] = std::move(values);
  }
  const std::vector<float> levels = parse_float_list(sparsity_list);
  if (levels.empty()) throw spqt::SpqtError("calibrate: no sparsity levels given");

  spqt::ThresholdManifest manifest;
  if (mode_name == "unified") {
    for (float s : levels) {
      spqt::ThresholdManifest::Section section;
      section.mode = spqt::CalibrationMode::Unified;
      section.target_sparsity = s;
      for (const auto& [label, values] : samples) {
        section.entries.emplace_back(label, spqt::calibrate_threshold(values, s).value);
      }
      manifest.sections.push_back(std::move(section));
    }
  } else if (mode_name == "grouped") {
    if (group_specs.empty()) throw spqt::SpqtError("grouped mode requires --group");
    std::vector<std::vector<std::string>> groups;
    for (const std::string& g : group_specs) groups.push_back(split(g, ','));
    for (float s : levels) {
      const auto thresholds = spqt::calibrate_grouped(samples, groups, s);
      spqt::ThresholdManifest::Section section;
      section.mode = spqt::CalibrationMode::Grouped;
      section.target_sparsity = s;
      for (const auto& [label, t] : thresholds) section.entries.emplace_back(label, t.value);
      manifest.sections.push_back(std::move(section));
    }
  } else {
    throw spqt::SpqtError("unknown calibration mode: " + mode_name);
  }

  write_text_file(output, spqt::format_threshold_manifest(manifest));
  std::cout << "wrote " << manifest.sections.size() << " manifest sections ("
            << samples.size() << " tensors, " << levels.size() << " sparsity levels) -> "
            << output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const GlobalOptions& opts, const std::string& container_path,
               const std::string& source_path, float sparsity, bool skip_requant) {
  const spqt::QuantMatrix q = spqt::load_quant_matrix(container_path);
  const spqt::FloatMatrix w = spqt::load_float_matrix(source_path, q.rows, q.cols);
  spqt::ThreadPool pool(opts.threads);
  bool pass = true;
  json report;
  report["container"] = container_path;
  report["shape"] = {{"m", q.rows}, {"k", q.cols}};
  report["layout"] = spqt::layout_name(q.layout);

  // deterministic codec: re-fitting the source must reproduce every
  // superblock byte-for-byte, which localizes any corruption
  json corrupt = json::array();
  if (!skip_requant) {
    std::size_t mismatches = 0;
    for (std::size_t gr = 0; gr < q.grid_rows() && mismatches < 16; ++gr) {
      for (std::size_t gc = 0; gc < q.grid_cols() && mismatches < 16; ++gc) {
        float slice[spqt::kSuperblockSize];
        spqt::extract_group_slice(w, q.layout, gr, gc, slice);
        const spqt::QuantSuperblock expected = spqt::quantize_superblock(slice);
        if (!(expected == q.superblocks[q.superblock_index(gr, gc)])) {
          std::cout << "corrupt superblock at grid (" << gr << ", " << gc << ")\n";
          corrupt.push_back({{"grid_row", gr}, {"grid_col", gc}});
          ++mismatches;
          pass = false;
        }
      }
    }
  }
  report["corrupt_superblocks"] = corrupt;
  report["round_trip_rmse"] = round_trip_rmse(q, w);

  // kernel outputs against the dequantize-then-reference oracle
  const std::vector<float> x = spqt::random_normal_vector(q.cols, opts.seed);
  std::vector<float> mags(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mags[i] = std::fabs(x[i]);
  const float threshold =
      sparsity > 0.0f ? spqt::calibrate_threshold(mags, sparsity).value : 0.0f;
  std::vector<float> xz(x);
  for (float& v : xz) {
    if (std::fabs(v) < threshold) v = 0.0f;
  }
  const spqt::FloatMatrix dq = spqt::dequantize_matrix(q);
  const std::vector<float> oracle_dense = spqt::gemv_reference(dq, x);
  const std::vector<float> oracle_sparse = spqt::gemv_reference(dq, xz);

  // per-row product norms: the scale of 32-bit summation-order noise, used
  // as the absolute allowance where the output deeply cancels
  auto product_norms = [&](const std::vector<float>& xv) {
    std::vector<double> norms(dq.rows, 0.0);
    for (std::size_t r = 0; r < dq.rows; ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < dq.cols; ++c) {
        const double p = double(dq.at(r, c)) * double(xv[c]);
        sq += p * p;
      }
      norms[r] = std::sqrt(sq);
    }
    return norms;
  };

  json kernels;
  auto check_kernel = [&](const char* name, const std::vector<float>& y,
                          const std::vector<float>& oracle, const std::vector<double>& norms,
                          bool clamped) {
    double worst_rel = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double err = std::fabs(double(y[i]) - double(oracle[i]));
      const double floor =
          std::max(spqt::kOracleAbsFloor, 32.0 * 0x1p-23 * norms[i]);
      ok = ok && err <= std::max(spqt::kOracleRelTol * std::fabs(double(oracle[i])), floor);
      worst_rel = std::max(
          worst_rel, err / std::max(std::fabs(double(oracle[i])),
                                    spqt::kOracleAbsFloor / spqt::kOracleRelTol));
    }
    std::cout << name << ": max rel error = " << worst_rel << (ok ? "  [ok]" : "  [FAIL]")
              << "\n";
    if (clamped) std::cerr << "warning: " << name << " config clamped to column count\n";
    kernels[name] = {{"max_rel_error", worst_rel}, {"pass", ok}};
    pass = pass && ok;
  };

  const std::vector<double> norms_dense = product_norms(x);
  const std::vector<double> norms_sparse = product_norms(xz);
  if (q.layout == spqt::Layout::RowGrouped) {
    const spqt::GemvResult dense = spqt::gemv_rowquant_dense(q, x, pool);
    check_kernel("rowquant", dense.y, oracle_dense, norms_dense, dense.report.config_clamped);
    const spqt::GemvResult b1 = spqt::gemv_rowquant_naive_sparse(q, x, threshold, pool);
    check_kernel("b1_naive", b1.y, oracle_sparse, norms_sparse, b1.report.config_clamped);
  } else {
    const spqt::KernelConfig cfg{8, 2, opts.threads, true};
    const spqt::GemvResult dense = spqt::gemv_zigzag_dense(q, x, cfg, pool);
    check_kernel("zigzag_dense", dense.y, oracle_dense, norms_dense,
                 dense.report.config_clamped);
    const spqt::GemvResult b2 = spqt::gemv_zigzag_sparse_unbalanced(q, x, threshold, cfg, pool);
    check_kernel("b2_unbalanced", b2.y, oracle_sparse, norms_sparse, b2.report.config_clamped);
    const spqt::ActiveIndexList idx = spqt::collect_indices_parallel(
        spqt::build_mask(x, threshold), spqt::kDefaultSegmentCapacity,
        spqt::CollectOrdering::Deterministic, pool);
    const spqt::GemvResult b3 = spqt::gemv_zigzag_sparse_balanced(q, x, idx, cfg, pool);
    check_kernel("b3_balanced", b3.y, oracle_sparse, norms_sparse, b3.report.config_clamped);
  }

  report["kernels"] = kernels;
  report["sparsity"] = sparsity;
  report["seed"] = opts.seed;
  report["pass"] = pass;
  if (!opts.json_out.empty()) write_text_file(opts.json_out, report.dump(2) + "\n");
  std::cout << (pass ? "verify: PASS" : "verify: FAIL") << "\n";
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

spqt::BenchSpec build_bench_spec(const GlobalOptions& opts, const std::string& preset,
                                 const std::string& shapes_list, const std::string& kernels_list,
                                 const std::string& sparsity_list, uint32_t repeats,
                                 uint32_t warmup, const std::string& config_text,
                                 const std::string& tune_manifest, bool autotune_flag) {
  spqt::BenchSpec spec;
  if (!preset.empty()) spec.shapes = spqt::preset_shapes(preset);
  for (const std::string& s : split(shapes_list, ',')) {
    const auto [m, k] = parse_dims(s);
    spec.shapes.push_back({m, k});
  }
  if (!kernels_list.empty()) spec.kernels = split(kernels_list, ',');
  if (!sparsity_list.empty()) spec.sparsity_levels = parse_float_list(sparsity_list);
  spec.repeats = repeats;
  spec.warmup = warmup;
  spec.seed = opts.seed;
  spec.worker_threads = opts.threads;
  spec.autotune_configs = autotune_flag;
  if (!config_text.empty()) {
    const auto [n1, n2] = parse_dims(config_text);  // N1xN2
    spec.config = spqt::KernelConfig{n1, n2, opts.threads, true};
  }
  if (!tune_manifest.empty()) {
    std::ifstream in(tune_manifest);
    if (!in.is_open()) throw spqt::SpqtError("cannot open tune manifest: " + tune_manifest);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const auto [m, k] = parse_dims(line.substr(0, eq));
      const std::vector<std::string> parts = split(line.substr(eq + 3), ',');
      if (parts.size() != 2) throw spqt::SpqtError("bad tune manifest line: " + line);
      spec.tuned[{m, k}] = spqt::KernelConfig{static_cast<uint32_t>(std::stoul(parts[0])),
                                              static_cast<uint32_t>(std::stoul(parts[1])),
                                              opts.threads, true};
    }
  }
  return spec;
}

int cmd_bench(const GlobalOptions& opts, const spqt::BenchSpec& spec) {
  spqt::ThreadPool pool(opts.threads);
  const json records = spqt::run_bench(spec, pool, &std::cout);
  const json out{{"schema", "spqt-bench-v1"},
                 {"worker_threads", pool.size()},
                 {"note", "latency and speedup fields are machine dependent; counter and "
                          "balance fields are exact"},
                 {"records", records}};
  if (!opts.json_out.empty()) write_text_file(opts.json_out, out.dump(2) + "\n");
  if (!opts.csv_out.empty()) write_text_file(opts.csv_out, spqt::bench_csv(records));

  for (const auto& rec : records) {
    std::cout << rec["kernel"].get<std::string>() << " " << rec["m"] << "x" << rec["k"]
              << " s=" << rec["sparsity_target"] << ": median "
              << rec["latency"]["median_ns"].get<double>() / 1e6 << " ms, speedup vs rowquant "
              << rec["speedup_vs_rowquant"]["value"].get<double>() << "x, mac ratio "
              << rec["counters"]["mac_ratio_vs_dense"].get<double>() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// autotune

std::vector<spqt::TuneCandidate> parse_grid(const std::string& text) {
  if (text.empty()) return spqt::default_tune_grid();
  // format: n1=1,2,4;n2=1,2
  std::vector<uint32_t> n1s;
  std::vector<uint32_t> n2s;
  for (const std::string& part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw spqt::SpqtError("bad grid spec: " + text);
    const std::string key = part.substr(0, eq);
    std::vector<uint32_t> values;
    for (const std::string& v : split(part.substr(eq + 1), ',')) {
      values.push_back(static_cast<uint32_t>(std::stoul(v)));
    }
    if (key == "n1") {
      n1s = values;
    } else if (key == "n2") {
      n2s = values;
    } else {
      throw spqt::SpqtError("bad grid key: " + key);
    }
  }
  if (n1s.empty() || n2s.empty()) throw spqt::SpqtError("grid needs both n1 and n2 values");
  std::vector<spqt::TuneCandidate> grid;
  for (uint32_t n1 : n1s) {
    for (uint32_t n2 : n2s) grid.push_back({n1, n2});
  }
  return grid;
}

int cmd_autotune(const GlobalOptions& opts, const std::string& container_path,
                 const std::string& preset, const std::string& shapes_list,
                 const std::string& grid_text, const std::string& mode_name, uint32_t repeats,
                 const std::string& output) {
  spqt::ThreadPool pool(opts.threads);
  spqt::AutotuneOptions tune_opts;
  tune_opts.repeats = repeats;
  if (mode_name == "wallclock") {
    tune_opts.mode = spqt::TuneMode::WallClock;
  } else if (mode_name == "virtual-cost") {
    tune_opts.mode = spqt::TuneMode::VirtualCost;
  } else {
    throw spqt::SpqtError("unknown autotune mode: " + mode_name);
  }
  const std::vector<spqt::TuneCandidate> grid = parse_grid(grid_text);

  std::vector<std::pair<spqt::BenchShape, spqt::QuantMatrix>> targets;
  if (!container_path.empty()) {
    spqt::QuantMatrix q = spqt::load_quant_matrix(container_path);
    if (q.layout != spqt::Layout::Zigzag) {
      throw spqt::SpqtError("autotune expects a zigzag container");
    }
    const spqt::BenchShape shape{q.rows, q.cols};
    targets.emplace_back(shape, std::move(q));
  }
  std::vector<spqt::BenchShape> shapes;
  if (!preset.empty()) shapes = spqt::preset_shapes(preset);
  for (const std::string& s : split(shapes_list, ',')) {
    const auto [m, k] = parse_dims(s);
    shapes.push_back({m, k});
  }
  for (const spqt::BenchShape& shape : shapes) {
    targets.emplace_back(
        shape, spqt::random_quant_matrix(shape.m, shape.k, spqt::Layout::Zigzag, opts.seed));
  }
  if (targets.empty()) {
    throw spqt::SpqtError("autotune: provide --container, --preset, or --shapes");
  }

  std::ostringstream manifest;
  manifest << "# spqt autotune manifest v1\n";
  json reports = json::array();
  for (const auto& [shape, q] : targets) {
    const std::vector<float> x = spqt::random_normal_vector(shape.k, opts.seed ^ shape.k);
    const spqt::AutotuneResult r = spqt::autotune(q, x, grid, tune_opts, pool);
    manifest << shape.m << "x" << shape.k << " = " << r.best.n1 << "," << r.best.n2 << "\n";
    std::cout << shape.m << "x" << shape.k << " -> (n1=" << r.best.n1 << ", n2=" << r.best.n2
              << ")\n";
    std::cout << "  " << r.annotation << "\n";
    reports.push_back(spqt::autotune_to_json(r, shape.m, shape.k));
  }
  write_text_file(output, manifest.str());
  if (!opts.json_out.empty()) {
    write_text_file(opts.json_out, json{{"schema", "spqt-autotune-v1"}, {"reports", reports}}.dump(2) + "\n");
  }
  std::cout << "wrote " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantized GEMV with dynamic activation sparsity"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions opts;
  app.add_option("--seed", opts.seed, "seed for generated inputs");
  app.add_option("--threads", opts.threads, "worker threads (0 = hardware concurrency)");
  app.add_option("--json-out", opts.json_out, "write a JSON report to this path");
  app.add_option("--csv-out", opts.csv_out, "write a CSV report to this path");

  // quantize
  auto* quantize = app.add_subcommand("quantize", "quantize a raw float matrix into a container");
  std::string q_input, q_dims, q_layout = "zigzag", q_output;
  quantize->add_option("--input", q_input, "raw little-endian f32 row-major matrix")->required();
  quantize->add_option("--dims", q_dims, "matrix dims as MxK")->required();
  quantize->add_option("--layout", q_layout, "zigzag or rowgrouped");
  quantize->add_option("--output", q_output, "output container path")->required();

  // convert
  auto* convert = app.add_subcommand("convert", "convert a container between layouts");
  std::string c_input, c_target, c_output;
  convert->add_option("--input", c_input)->required();
  convert->add_option("--target", c_target, "target layout")->required();
  convert->add_option("--output", c_output)->required();

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "compute sparsity thresholds from samples");
  std::vector<std::string> cal_samples, cal_groups;
  std::string cal_mode = "unified", cal_sparsity = "0.25,0.4,0.5,0.65", cal_output;
  calibrate->add_option("--samples", cal_samples, "label=path of raw f32 magnitude samples");
  calibrate->add_option("--mode", cal_mode, "unified or grouped");
  calibrate->add_option("--group", cal_groups, "comma-separated labels sharing a threshold");
  calibrate->add_option("--sparsity", cal_sparsity, "comma-separated target sparsity levels");
  calibrate->add_option("--output", cal_output, "manifest output path")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "check a container against its float source");
  std::string v_container, v_source;
  float v_sparsity = 0.5f;
  bool v_skip_requant = false;
  verify->add_option("--container", v_container)->required();
  verify->add_option("--source", v_source, "raw f32 source matrix")->required();
  verify->add_option("--sparsity", v_sparsity, "sparsity level for the sparse kernels");
  verify->add_flag("--skip-requant", v_skip_requant,
                   "skip the byte-exact re-quantization check (use for converted containers)");

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark the kernel family");
  std::string b_preset, b_shapes, b_kernels, b_sparsity, b_config, b_tune_manifest;
  uint32_t b_repeats = 20, b_warmup = 3;
  bool b_autotune = false;
  bench->add_option("--preset", b_preset, "paper-grid or llama-shapes");
  bench->add_option("--shapes", b_shapes, "comma-separated MxK shapes");
  bench->add_option("--kernels", b_kernels,
                    "subset of reference,rowquant,b1_naive,zigzag_dense,b2_unbalanced,b3_balanced");
  bench->add_option("--sparsity", b_sparsity, "comma-separated sparsity levels");
  bench->add_option("--repeats", b_repeats, "timed repeats per kernel");
  bench->add_option("--warmup", b_warmup, "warmup iterations per kernel");
  bench->add_option("--config", b_config, "fixed zigzag config as N1xN2");
  bench->add_option("--tune-manifest", b_tune_manifest, "shape->config manifest from autotune");
  bench->add_flag("--autotune", b_autotune, "autotune each shape before timing");

  // autotune
  auto* autotune = app.add_subcommand("autotune", "search (n1, n2) per GEMV shape");
  std::string t_container, t_preset, t_shapes, t_grid, t_mode = "wallclock", t_output;
  uint32_t t_repeats = 20;
  autotune->add_option("--container", t_container, "tune for this container's shape");
  autotune->add_option("--preset", t_preset, "paper-grid or llama-shapes");
  autotune->add_option("--shapes", t_shapes, "comma-separated MxK shapes");
  autotune->add_option("--grid", t_grid, "candidate grid, e.g. n1=1,2,4,8;n2=1,2,4");
  autotune->add_option("--mode", t_mode, "wallclock or virtual-cost");
  autotune->add_option("--repeats", t_repeats, "timed repeats per candidate");
  autotune->add_option("--output", t_output, "manifest output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (quantize->parsed()) return cmd_quantize(opts, q_input, q_dims, q_layout, q_output);
    if (convert->parsed()) return cmd_convert(opts, c_input, c_target, c_output);
    if (calibrate->parsed()) {
      return cmd_calibrate(cal_samples, cal_mode, cal_groups, cal_sparsity, cal_output);
    }
    if (verify->parsed()) {
      return cmd_verify(opts, v_container, v_source, v_sparsity, v_skip_requant);
    }
    if (bench->parsed()) {
      const spqt::BenchSpec spec =
          build_bench_spec(opts, b_preset, b_shapes, b_kernels, b_sparsity, b_repeats, b_warmup,
                           b_config, b_tune_manifest, b_autotune);
      return cmd_bench(opts, spec);
    }
    if (autotune->parsed()) {
      return cmd_autotune(opts, t_container, t_preset, t_shapes, t_grid, t_mode, t_repeats,
                          t_output);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
