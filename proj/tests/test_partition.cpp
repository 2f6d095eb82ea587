#include <doctest.h>

#include <random>

#include "spqt/gemv.hpp"
#include "spqt/scan.hpp"

using namespace spqt;

namespace {

ActiveIndexList make_idx(std::size_t n) {
  ActiveIndexList idx;
  idx.source_len = static_cast<uint32_t>(2 * n + 1);
  for (std::size_t i = 0; i < n; ++i) idx.indices.push_back(static_cast<uint32_t>(2 * i));
  return idx;
}

}  // namespace

TEST_CASE("nine indices over three workers split evenly") {
  const auto ranges = partition_indices(make_idx(9), 3);
  REQUIRE(ranges.size() == 3);
  CHECK(ranges[0].size() == 3);
  CHECK(ranges[1].size() == 3);
  CHECK(ranges[2].size() == 3);
}

TEST_CASE("remainder goes to the lower worker indices") {
  const auto ranges = partition_indices(make_idx(10), 3);
  REQUIRE(ranges.size() == 3);
  CHECK(ranges[0].size() == 4);
  CHECK(ranges[1].size() == 3);
  CHECK(ranges[2].size() == 3);
  CHECK(ranges[0].begin == 0);
  CHECK(ranges[0].end == 4);
  CHECK(ranges[2].end == 10);
}

TEST_CASE("empty index list yields empty ranges") {
  const auto ranges = partition_indices(make_idx(0), 5);
  REQUIRE(ranges.size() == 5);
  for (const auto& r : ranges) CHECK(r.size() == 0);
}

TEST_CASE("zero workers is an error") {
  CHECK_THROWS_AS(partition_indices(make_idx(4), 0), SpqtError);
}

TEST_CASE("partition covers exactly once with spread at most one") {
  std::mt19937 rng(5150);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = rng() % 3000;
    const unsigned workers = 1 + rng() % 64;
    const auto ranges = partition_even(n, workers);
    REQUIRE(ranges.size() == workers);
    uint32_t at = 0;
    uint32_t lo = UINT32_MAX;
    uint32_t hi = 0;
    for (unsigned w = 0; w < workers; ++w) {
      CHECK(ranges[w].begin == at);
      at = ranges[w].end;
      lo = std::min(lo, ranges[w].size());
      hi = std::max(hi, ranges[w].size());
      if (w > 0) CHECK(ranges[w].size() <= ranges[w - 1].size());
    }
    CHECK(at == n);
    CHECK(hi - lo <= 1);
  }
}
