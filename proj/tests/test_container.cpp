#include <doctest.h>

#include <cstring>
#include <vector>

#include "spqt/container.hpp"
#include "spqt/matrix.hpp"
#include "spqt/synth.hpp"

using namespace spqt;

TEST_CASE("wire format layout is bit-exact") {
  FloatMatrix w(256, 1);
  for (std::size_t r = 0; r < 256; ++r) w.at(r, 0) = static_cast<float>(r);
  const QuantMatrix q = quantize_matrix(w, Layout::Zigzag);
  const std::vector<uint8_t> bytes = serialize_quant_matrix(q);

  REQUIRE(bytes.size() == 36 + 148);
  CHECK(std::memcmp(bytes.data(), "SPQT", 4) == 0);
  CHECK(bytes[4] == 1);  // version, little-endian u32
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 1);  // zigzag
  CHECK(bytes[9] == 4);  // bit width
  CHECK(bytes[10] == 0);
  CHECK(bytes[11] == 0);
  CHECK(bytes[12] == 0);  // m = 256
  CHECK(bytes[13] == 1);
  CHECK(bytes[20] == 1);  // k = 1
  CHECK(bytes[28] == 1);  // superblock count = 1

  const QuantSuperblock& sb = q.superblocks[0];
  CHECK(bytes[36] == (sb.d_bits & 0xff));
  CHECK(bytes[37] == (sb.d_bits >> 8));
  CHECK(bytes[38] == (sb.dmin_bits & 0xff));
  CHECK(bytes[39] == (sb.dmin_bits >> 8));
  // element 2i in the low nibble of code byte i
  CHECK((bytes[56] & 0x0f) == sb.code(0));
  CHECK((bytes[56] >> 4) == sb.code(1));
  CHECK((bytes[56 + 127] >> 4) == sb.code(255));
}

TEST_CASE("serialize -> parse -> serialize is byte-identical") {
  const QuantMatrix q = random_quant_matrix(512, 768, Layout::Zigzag, 808);
  const std::vector<uint8_t> first = serialize_quant_matrix(q);
  const QuantMatrix parsed = parse_quant_matrix(first);
  const std::vector<uint8_t> second = serialize_quant_matrix(parsed);
  CHECK(first == second);
  CHECK(parsed.rows == q.rows);
  CHECK(parsed.cols == q.cols);
  CHECK(parsed.layout == q.layout);
  REQUIRE(parsed.superblocks.size() == q.superblocks.size());
  for (std::size_t i = 0; i < q.superblocks.size(); ++i) {
    CHECK(parsed.superblocks[i] == q.superblocks[i]);
  }
}

TEST_CASE("round trip preserves logical dims with padding") {
  FloatMatrix w(100, 300);
  for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] = static_cast<float>(i % 17) * 0.1f;
  for (Layout layout : {Layout::RowGrouped, Layout::Zigzag}) {
    const QuantMatrix q = quantize_matrix(w, layout);
    const QuantMatrix back = parse_quant_matrix(serialize_quant_matrix(q));
    CHECK(back.rows == 100);
    CHECK(back.cols == 300);
    CHECK(back.padded_rows == q.padded_rows);
    CHECK(back.padded_cols == q.padded_cols);
  }
}

TEST_CASE("parser rejects malformed containers") {
  const QuantMatrix q = random_quant_matrix(256, 256, Layout::Zigzag, 11);
  std::vector<uint8_t> bytes = serialize_quant_matrix(q);

  {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad[4] = 9;  // version
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad[8] = 7;  // layout
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad[9] = 8;  // bit width
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad.resize(bad.size() - 1);  // truncated
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad[12] = 255;  // superblock count no longer matches dims
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
  {
    auto bad = bytes;
    bad[36 + 4] = 77;  // block scale above 63
    CHECK_THROWS_AS(parse_quant_matrix(bad), SpqtError);
  }
}
