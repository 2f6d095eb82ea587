#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/container.hpp"
#include "spqt/matrix.hpp"

namespace spqt {

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), "cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  require(static_cast<bool>(in), "read failed: " + path);
  return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.is_open(), "cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), "write failed: " + path);
}

// Raw little-endian 32-bit floats, no header. Dims come from the caller.
static_assert(std::endian::native == std::endian::little,
              "raw float file I/O assumes a little-endian host");

inline std::vector<float> read_f32_file(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  require(bytes.size() % 4 == 0, "float file size is not a multiple of 4: " + path);
  std::vector<float> values(bytes.size() / 4);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

inline void write_f32_file(const std::string& path, const std::vector<float>& values) {
  std::vector<uint8_t> bytes(values.size() * 4);
  std::memcpy(bytes.data(), values.data(), bytes.size());
  write_file_bytes(path, bytes);
}

inline FloatMatrix load_float_matrix(const std::string& path, uint32_t m, uint32_t k) {
  std::vector<float> values = read_f32_file(path);
  require(values.size() == std::size_t(m) * k,
          "float file holds " + std::to_string(values.size()) + " values, expected " +
              std::to_string(std::size_t(m) * k) + " for " + std::to_string(m) + "x" +
              std::to_string(k));
  FloatMatrix w;
  w.rows = m;
  w.cols = k;
  w.data = std::move(values);
  return w;
}

inline void save_quant_matrix(const std::string& path, const QuantMatrix& q) {
  write_file_bytes(path, serialize_quant_matrix(q));
}

inline QuantMatrix load_quant_matrix(const std::string& path) {
  return parse_quant_matrix(read_file_bytes(path));
}

}  // namespace spqt
