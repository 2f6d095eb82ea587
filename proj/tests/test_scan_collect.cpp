#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "spqt/scan.hpp"
#include "support/codec_oracle.hpp"

using namespace spqt;

namespace {

std::vector<uint8_t> random_mask(std::size_t len, double density, std::mt19937& rng) {
  std::bernoulli_distribution bit(density);
  std::vector<uint8_t> mask(len);
  for (auto& m : mask) m = bit(rng) ? 1 : 0;
  return mask;
}

}  // namespace

TEST_CASE("sequential collector basics") {
  CHECK(collect_indices_sequential(std::vector<uint8_t>{}).indices.empty());
  CHECK(collect_indices_sequential(std::vector<uint8_t>{0, 0, 0}).indices.empty());
  CHECK(collect_indices_sequential(std::vector<uint8_t>{1, 1, 1, 1, 1}).indices ==
        std::vector<uint32_t>{0, 1, 2, 3, 4});
  const auto list = collect_indices_sequential(std::vector<uint8_t>{1, 0, 1, 1, 0, 0, 0, 1, 0});
  CHECK(list.indices == std::vector<uint32_t>{0, 2, 3, 7});
  CHECK(list.n_ns() == 4);
  CHECK(list.source_len == 9);
}

TEST_CASE("blelloch scan frozen examples") {
  const auto r = blelloch_exclusive_scan(std::vector<uint8_t>{1, 0, 1, 1, 0});
  CHECK(r.prefix == std::vector<uint32_t>{0, 1, 1, 2, 3});
  CHECK(r.total == 3);

  const auto zeros = blelloch_exclusive_scan(std::vector<uint8_t>(8, 0));
  CHECK(zeros.prefix == std::vector<uint32_t>(8, 0));
  CHECK(zeros.total == 0);

  const auto empty = blelloch_exclusive_scan(std::vector<uint8_t>{});
  CHECK(empty.prefix.empty());
  CHECK(empty.total == 0);
}

TEST_CASE("blelloch equals the sequential scan on every power-of-two length") {
  std::mt19937 rng(31337);
  for (std::size_t len = 2; len <= 1024; len <<= 1) {
    for (int round = 0; round < 100; ++round) {
      const auto mask = random_mask(len, 0.3 + 0.4 * (round % 3), rng);
      uint32_t expected_total = 0;
      const auto expected = spqt_test::sequential_exclusive_scan(mask, &expected_total);
      const auto got = blelloch_exclusive_scan(mask);
      CHECK(got.prefix == expected);
      CHECK(got.total == expected_total);
    }
  }
}

TEST_CASE("blelloch handles non-power-of-two lengths up to capacity") {
  std::mt19937 rng(99);
  for (std::size_t len : {1u, 3u, 5u, 17u, 255u, 513u, 1000u, 1023u}) {
    const auto mask = random_mask(len, 0.5, rng);
    uint32_t expected_total = 0;
    const auto expected = spqt_test::sequential_exclusive_scan(mask, &expected_total);
    const auto got = blelloch_exclusive_scan(mask);
    CHECK(got.prefix == expected);
    CHECK(got.total == expected_total);
  }
  CHECK_THROWS_AS(blelloch_exclusive_scan(std::vector<uint8_t>(1025, 1)), SpqtError);
  CHECK_THROWS_AS(blelloch_exclusive_scan(std::vector<uint8_t>(100, 1), 64), SpqtError);
}

TEST_CASE("parallel deterministic collector equals the sequential oracle") {
  std::mt19937 rng(2468);
  ThreadPool pool(4);
  for (std::size_t len : {0u, 1u, 255u, 256u, 257u, 1024u, 4097u, 16384u}) {
    for (int round = 0; round < 20; ++round) {
      const auto mask = random_mask(len, 0.05 + 0.045 * round, rng);
      const auto oracle = collect_indices_sequential(mask);
      const auto got =
          collect_indices_parallel(mask, 1024, CollectOrdering::Deterministic, pool);
      CHECK(got.indices == oracle.indices);
      CHECK(got.source_len == oracle.source_len);
      // sparsity accounting: actives + masked-out = source length
      std::size_t zeroed = 0;
      for (uint8_t m : mask) zeroed += m == 0 ? 1 : 0;
      CHECK(got.n_ns() + zeroed == len);
    }
  }
}

TEST_CASE("reservation-order output is a permutation built from ascending runs") {
  std::mt19937 rng(1357);
  ThreadPool pool(4);
  for (int round = 0; round < 40; ++round) {
    const std::size_t len = 512 + rng() % 8192;
    const auto mask = random_mask(len, 0.4, rng);
    const auto oracle = collect_indices_sequential(mask);
    auto got = collect_indices_parallel(mask, 256, CollectOrdering::ReservationOrder, pool);
    CHECK(got.n_ns() == oracle.n_ns());
    std::sort(got.indices.begin(), got.indices.end());
    CHECK(got.indices == oracle.indices);
  }

  // 2048-bit mask split into two 1024 segments: sorting recovers the oracle
  const auto mask = random_mask(2048, 0.5, rng);
  const auto oracle = collect_indices_sequential(mask);
  auto got = collect_indices_parallel(mask, 1024, CollectOrdering::ReservationOrder, pool);
  std::sort(got.indices.begin(), got.indices.end());
  CHECK(got.indices == oracle.indices);
}

TEST_CASE("empty mask yields an empty list in both modes") {
  ThreadPool pool(2);
  for (CollectOrdering ordering :
       {CollectOrdering::Deterministic, CollectOrdering::ReservationOrder}) {
    const auto got = collect_indices_parallel(std::vector<uint8_t>{}, 1024, ordering, pool);
    CHECK(got.indices.empty());
    CHECK(got.source_len == 0);
  }
}

TEST_CASE("segment capacity validation") {
  ThreadPool pool(2);
  const std::vector<uint8_t> mask{1, 0, 1};
  CHECK_THROWS_AS(collect_indices_parallel(mask, 0, CollectOrdering::Deterministic, pool),
                  SpqtError);
  CHECK_THROWS_AS(collect_indices_parallel(mask, 1, CollectOrdering::Deterministic, pool),
                  SpqtError);
  CHECK_THROWS_AS(collect_indices_parallel(mask, 48, CollectOrdering::Deterministic, pool),
                  SpqtError);
  CHECK_THROWS_AS(collect_indices_parallel(mask, 131072, CollectOrdering::Deterministic, pool),
                  SpqtError);
  CHECK_NOTHROW(collect_indices_parallel(mask, 2, CollectOrdering::Deterministic, pool));
  CHECK_NOTHROW(collect_indices_parallel(mask, 65536, CollectOrdering::Deterministic, pool));
}

TEST_CASE("collector output is identical across pool sizes in deterministic mode") {
  std::mt19937 rng(86420);
  const auto mask = random_mask(10000, 0.37, rng);
  ThreadPool p1(1);
  ThreadPool p2(2);
  ThreadPool p8(8);
  const auto a = collect_indices_parallel(mask, 512, CollectOrdering::Deterministic, p1);
  const auto b = collect_indices_parallel(mask, 512, CollectOrdering::Deterministic, p2);
  const auto c = collect_indices_parallel(mask, 512, CollectOrdering::Deterministic, p8);
  CHECK(a.indices == b.indices);
  CHECK(a.indices == c.indices);
}
