#pragma once

// SPQT binary container (little-endian):
//
//   offset  size  field
//   0       4     magic "SPQT"
//   4       4     u32 version = 1
//   8       1     u8 layout (0 = rowgrouped, 1 = zigzag)
//   9       1     u8 bit width = 4
//   10      2     u16 reserved = 0
//   12      8     u64 rows (m)
//   20      8     u64 cols (k)
//   28      8     u64 superblock count
//   36      ...   superblocks in storage order, 148 bytes each:
//                 d (binary16), dmin (binary16), block_scales[8],
//                 block_mins[8], codes[128] (element 2i low nibble,
//                 element 2i+1 high nibble of byte i)

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "spqt/common.hpp"
#include "spqt/matrix.hpp"

namespace spqt {

inline constexpr uint32_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 36;

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (uint16_t(p[1]) << 8));
}

inline uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
  return v;
}

inline uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<uint8_t> serialize_quant_matrix(const QuantMatrix& q) {
  const std::size_t count = q.superblocks.size();
  require(count == std::size_t(q.grid_rows()) * q.grid_cols(),
          "serialize: superblock count does not match grid");

  std::vector<uint8_t> out;
  out.reserve(kContainerHeaderBytes + count * kSuperblockWireBytes);
  out.insert(out.end(), {'S', 'P', 'Q', 'T'});
  detail::put_u32(out, kContainerVersion);
  out.push_back(static_cast<uint8_t>(q.layout));
  out.push_back(4);  // bit width
  detail::put_u16(out, 0);
  detail::put_u64(out, q.rows);
  detail::put_u64(out, q.cols);
  detail::put_u64(out, count);

  for (const QuantSuperblock& sb : q.superblocks) {
    detail::put_u16(out, sb.d_bits);
    detail::put_u16(out, sb.dmin_bits);
    out.insert(out.end(), sb.block_scales.begin(), sb.block_scales.end());
    out.insert(out.end(), sb.block_mins.begin(), sb.block_mins.end());
    out.insert(out.end(), sb.codes.begin(), sb.codes.end());
  }
  return out;
}

inline QuantMatrix parse_quant_matrix(std::span<const uint8_t> bytes) {
  require(bytes.size() >= kContainerHeaderBytes, "container: truncated header");
  require(std::memcmp(bytes.data(), "SPQT", 4) == 0, "container: bad magic");
  const uint32_t version = detail::get_u32(bytes.data() + 4);
  require(version == kContainerVersion, "container: unsupported version");
  const uint8_t layout_byte = bytes[8];
  require(layout_byte <= 1, "container: bad layout byte");
  require(bytes[9] == 4, "container: unsupported bit width");
  require(detail::get_u16(bytes.data() + 10) == 0, "container: nonzero reserved field");

  const uint64_t m = detail::get_u64(bytes.data() + 12);
  const uint64_t k = detail::get_u64(bytes.data() + 20);
  const uint64_t count = detail::get_u64(bytes.data() + 28);
  require(m >= 1 && k >= 1, "container: empty dims");
  require(m <= UINT32_MAX && k <= UINT32_MAX && count <= UINT32_MAX,
          "container: dims out of range");

  QuantMatrix q;
  q.layout = static_cast<Layout>(layout_byte);
  q.rows = static_cast<uint32_t>(m);
  q.cols = static_cast<uint32_t>(k);
  q.padded_rows = q.layout == Layout::Zigzag
                      ? static_cast<uint32_t>(ceil_div(m, kSuperblockSize) * kSuperblockSize)
                      : q.rows;
  q.padded_cols = q.layout == Layout::Zigzag
                      ? q.cols
                      : static_cast<uint32_t>(ceil_div(k, kSuperblockSize) * kSuperblockSize);
  require(count == std::size_t(q.grid_rows()) * q.grid_cols(),
          "container: superblock count does not match dims");
  require(bytes.size() == kContainerHeaderBytes + count * kSuperblockWireBytes,
          "container: size does not match superblock count");

  q.superblocks.resize(count);
  const uint8_t* p = bytes.data() + kContainerHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += kSuperblockWireBytes) {
    QuantSuperblock& sb = q.superblocks[i];
    sb.d_bits = detail::get_u16(p);
    sb.dmin_bits = detail::get_u16(p + 2);
    std::memcpy(sb.block_scales.data(), p + 4, 8);
    std::memcpy(sb.block_mins.data(), p + 12, 8);
    std::memcpy(sb.codes.data(), p + 20, 128);
    for (std::size_t b = 0; b < kBlocksPerSuperblock; ++b) {
      require(sb.block_scales[b] <= kMaxBlockScale && sb.block_mins[b] <= kMaxBlockScale,
              "container: block scale/min out of range");
    }
  }
  return q;
}

}  // namespace spqt
