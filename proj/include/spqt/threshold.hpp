#pragma once

// Sparsity thresholding. A hidden-state entry x_i is treated as sparse when
// |x_i| < threshold; entries exactly at the threshold stay active. Thresholds
// are calibrated as the nearest-rank empirical quantile of magnitude samples:
//
//   threshold = sorted_samples[ceil(s * N) - 1]   for target sparsity s > 0
//   threshold = 0                                 for s = 0
//
// Grouped calibration concatenates the samples of every tensor in a group and
// computes one shared threshold for the group.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spqt/common.hpp"

namespace spqt {

enum class CalibrationMode : uint8_t { Unified = 0, Grouped = 1 };

inline const char* calibration_mode_name(CalibrationMode m) {
  return m == CalibrationMode::Unified ? "unified" : "grouped";
}

struct SparsityThreshold {
  float value = 0.0f;
  float target_sparsity = 0.0f;
  CalibrationMode mode = CalibrationMode::Unified;
  std::string group_id;  // empty unless produced by grouped calibration
};

inline SparsityThreshold calibrate_threshold(std::span<const float> magnitude_samples,
                                             float target_sparsity) {
  require(!magnitude_samples.empty(), "calibrate_threshold: empty sample set");
  require(target_sparsity >= 0.0f && target_sparsity < 1.0f,
          "calibrate_threshold: target sparsity must be in [0, 1)");
  for (float v : magnitude_samples) {
    require(std::isfinite(v) && v >= 0.0f, "calibrate_threshold: samples must be "
                                           "finite non-negative magnitudes");
  }

  SparsityThreshold t;
  t.target_sparsity = target_sparsity;
  if (target_sparsity == 0.0f) return t;

  std::vector<float> sorted(magnitude_samples.begin(), magnitude_samples.end());
  std::stable_sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const auto rank = static_cast<std::size_t>(std::ceil(double(target_sparsity) * n));
  t.value = sorted[rank - 1];
  return t;
}

inline std::map<std::string, SparsityThreshold> calibrate_grouped(
    const std::map<std::string, std::vector<float>>& per_tensor_samples,
    const std::vector<std::vector<std::string>>& groups, float target_sparsity) {
  std::size_t labels_seen = 0;
  std::map<std::string, SparsityThreshold> out;
  for (const auto& group : groups) {
    require(!group.empty(), "calibrate_grouped: empty group");
    std::vector<float> merged;
    std::string group_id;
    for (const std::string& label : group) {
      auto it = per_tensor_samples.find(label);
      require(it != per_tensor_samples.end() && !it->second.empty(),
              "calibrate_grouped: no samples for tensor '" + label + "'");
      require(!out.contains(label), "calibrate_grouped: tensor '" + label +
                                        "' appears in more than one group");
      merged.insert(merged.end(), it->second.begin(), it->second.end());
      if (!group_id.empty()) group_id += "+";
      group_id += label;
      ++labels_seen;
    }
    SparsityThreshold t = calibrate_threshold(merged, target_sparsity);
    t.mode = CalibrationMode::Grouped;
    t.group_id = group_id;
    for (const std::string& label : group) out[label] = t;
  }
  require(labels_seen == per_tensor_samples.size(),
          "calibrate_grouped: groups must partition the tensor labels");
  return out;
}

// mask[i] = 1 iff |x[i]| >= threshold
inline std::vector<uint8_t> build_mask(std::span<const float> x, float threshold) {
  std::vector<uint8_t> mask(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(std::isfinite(x[i]), "build_mask: non-finite input");
    mask[i] = std::fabs(x[i]) >= threshold ? 1 : 0;
  }
  return mask;
}

inline std::vector<uint8_t> build_mask(std::span<const float> x, const SparsityThreshold& t) {
  return build_mask(x, t.value);
}

// ----------------------------------------------------------------------------
// Threshold manifest: plain text, one section per (mode, target sparsity),
// each section a header line followed by `tensor_label = threshold` lines.
//
//   mode = unified, target_sparsity = 0.5
//   blk0.wq = 0.6744
//   blk0.wk = 0.7011

struct ThresholdManifest {
  struct Section {
    CalibrationMode mode = CalibrationMode::Unified;
    float target_sparsity = 0.0f;
    std::vector<std::pair<std::string, float>> entries;
  };
  std::vector<Section> sections;
};

inline std::string format_threshold_manifest(const ThresholdManifest& manifest) {
  std::ostringstream out;
  for (const auto& section : manifest.sections) {
    out.precision(6);  // operator-facing level, reparses to the same float
    out << "mode = " << calibration_mode_name(section.mode)
        << ", target_sparsity = " << section.target_sparsity << "\n";
    out.precision(9);  // full float round-trip for computed thresholds
    for (const auto& [label, value] : section.entries) {
      out << label << " = " << value << "\n";
    }
    out << "\n";
  }
  return out.str();
}

inline ThresholdManifest parse_threshold_manifest(const std::string& text) {
  ThresholdManifest manifest;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("mode = ", 0) == 0) {
      ThresholdManifest::Section section;
      std::string mode_name;
      const auto comma = line.find(',');
      require(comma != std::string::npos, "threshold manifest: malformed header line");
      mode_name = line.substr(7, comma - 7);
      if (mode_name == "unified") {
        section.mode = CalibrationMode::Unified;
      } else if (mode_name == "grouped") {
        section.mode = CalibrationMode::Grouped;
      } else {
        throw SpqtError("threshold manifest: unknown mode '" + mode_name + "'");
      }
      const auto eq = line.find('=', comma);
      require(eq != std::string::npos, "threshold manifest: malformed header line");
      section.target_sparsity = std::stof(line.substr(eq + 1));
      manifest.sections.push_back(std::move(section));
      continue;
    }
    const auto eq = line.find(" = ");
    require(eq != std::string::npos, "threshold manifest: malformed entry line: " + line);
    require(!manifest.sections.empty(), "threshold manifest: entry before any header");
    manifest.sections.back().entries.emplace_back(line.substr(0, eq),
                                                  std::stof(line.substr(eq + 3)));
  }
  return manifest;
}

}  // namespace spqt
