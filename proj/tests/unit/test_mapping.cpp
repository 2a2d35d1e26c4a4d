#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracle_vectors.hpp"
#include "pirates/common/errors.hpp"
#include "pirates/mapping/bucket_mapping.hpp"

using namespace pirates;
using namespace pirates::mapping;

namespace {

MappingSeed test_seed() {
  MappingSeed s;
  for (int i = 0; i < 16; ++i) s.bytes[i] = static_cast<std::uint8_t>(i);
  return s;
}

// Exhaustive search for a system of distinct representatives.
bool brute_force_feasible(const std::vector<std::array<std::uint32_t, 3>>& triples, std::size_t t,
                          std::vector<bool>& used) {
  if (t == triples.size()) return true;
  for (auto b : triples[t]) {
    if (used[b - 1]) continue;
    used[b - 1] = true;
    if (brute_force_feasible(triples, t + 1, used)) return true;
    used[b - 1] = false;
  }
  return false;
}

}  // namespace

TEST(BucketHash, MatchesReference) {
  for (std::uint32_t m = 1; m <= 5; ++m) {
    for (std::uint8_t k = 0; k < 3; ++k) {
      EXPECT_EQ(bucket_hash(test_seed(), k, m, 0, 6), oracle::kBucketHashB6[m - 1][k]);
    }
  }
}

TEST(AssignBuckets, MatchesReferenceTriples) {
  auto check = [](std::uint32_t b, const std::uint32_t (&ref)[20][4]) {
    for (std::uint32_t m = 1; m <= 20; ++m) {
      auto t = assign_buckets(m, test_seed(), b);
      EXPECT_EQ(t.buckets[0], ref[m - 1][0]);
      EXPECT_EQ(t.buckets[1], ref[m - 1][1]);
      EXPECT_EQ(t.buckets[2], ref[m - 1][2]);
      EXPECT_EQ(t.nonce, ref[m - 1][3]);
    }
  };
  check(3, oracle::kTriplesB3);
  check(6, oracle::kTriplesB6);
  check(9, oracle::kTriplesB9);
}

TEST(BucketCount, FollowsGroupSize) {
  EXPECT_EQ(n_buckets_for(2), 3u);
  EXPECT_EQ(n_buckets_for(3), 3u);
  EXPECT_EQ(n_buckets_for(4), 5u);
  EXPECT_EQ(n_buckets_for(5), 6u);
  EXPECT_EQ(n_buckets_for(11), 15u);
}

TEST(Mapping, EveryMailboxInExactlyThreeSortedBuckets) {
  for (std::uint32_t seed_byte = 0; seed_byte < 5; ++seed_byte) {
    MappingSeed seed;
    seed.bytes[0] = static_cast<std::uint8_t>(seed_byte);
    auto m = build_mapping(100, 6, seed);
    std::vector<int> count(101, 0);
    std::size_t total = 0;
    for (std::uint32_t b = 1; b <= 6; ++b) {
      const auto& list = m.bucket(b);
      EXPECT_TRUE(std::is_sorted(list.begin(), list.end()));
      for (auto id : list) ++count[id];
      total += list.size();
    }
    EXPECT_EQ(total, 300u);
    for (std::uint32_t i = 1; i <= 100; ++i) {
      EXPECT_EQ(count[i], 3);
      for (auto b : m.assignment(i).buckets) EXPECT_TRUE(m.position_of(b, i).has_value());
    }
  }
}

TEST(Mapping, SeedDeterminesMapping) {
  EXPECT_EQ(build_mapping(50, 6, test_seed()), build_mapping(50, 6, test_seed()));
  MappingSeed other = test_seed();
  other.bytes[15] ^= 1;
  EXPECT_FALSE(build_mapping(50, 6, test_seed()) == build_mapping(50, 6, other));
}

TEST(Mapping, SimulatedUsersPadBuckets) {
  auto m = build_mapping(10, 3, test_seed());
  m.add_simulated_users(40);
  for (std::uint32_t b = 1; b <= 3; ++b) EXPECT_EQ(m.bucket(b).size(), 40u);
  EXPECT_EQ(m.n_simulated(), 90u);
  for (std::uint32_t v = 11; v <= 100; ++v) {
    auto src = m.duplicate_source(v);
    EXPECT_GE(src, 1u);
    EXPECT_LE(src, 10u);
  }
  EXPECT_THROW(m.duplicate_source(5), Error);
}

TEST(Mapping, EmptyBucketsStillHaveOnePlaceholder) {
  auto m = build_mapping(1, 9, test_seed());
  std::size_t empty = 0;
  for (std::uint32_t b = 1; b <= 9; ++b) {
    if (m.bucket(b).empty()) {
      ++empty;
      EXPECT_EQ(m.query_length(b), 1u);
    }
  }
  EXPECT_EQ(empty, 6u);
}

TEST(Selection, AgreesWithBruteForceOracle) {
  Rng r(21);
  int mismatches = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    MappingSeed seed;
    r.fill(seed.bytes);
    const std::uint32_t n = 12;
    const std::uint32_t b = 3 + static_cast<std::uint32_t>(r.uniform(4));
    auto m = build_mapping(n, b, seed);
    std::vector<std::uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), r);
    const std::size_t k = 1 + r.uniform(b);
    std::vector<std::uint32_t> targets(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));

    std::vector<std::array<std::uint32_t, 3>> triples;
    for (auto t : targets) triples.push_back(m.assignment(t).buckets);
    std::vector<bool> used(b, false);
    const bool feasible = brute_force_feasible(triples, 0, used);
    if (!feasible) ++infeasible;

    auto sel = select_indices(targets, m, r);
    if (sel.all_random == feasible) ++mismatches;
    ASSERT_EQ(sel.positions.size(), b);
    for (std::uint32_t bk = 1; bk <= b; ++bk) {
      EXPECT_GE(sel.positions[bk - 1], 1u);
      EXPECT_LE(sel.positions[bk - 1], m.query_length(bk));
    }
    if (!sel.all_random) {
      std::vector<std::uint32_t> hit;
      for (std::uint32_t bk = 1; bk <= b; ++bk) {
        if (!sel.is_real(bk)) continue;
        auto id = *sel.targets[bk - 1];
        hit.push_back(id);
        EXPECT_EQ(m.bucket(bk)[sel.positions[bk - 1] - 1], id);
      }
      std::sort(hit.begin(), hit.end());
      std::sort(targets.begin(), targets.end());
      EXPECT_EQ(hit, targets);
    }
  }
  EXPECT_EQ(mismatches, 0);
  EXPECT_GT(infeasible, 0);
}

TEST(Selection, Errors) {
  Rng r(22);
  auto m = build_mapping(10, 3, test_seed());
  std::vector<std::uint32_t> too_many{1, 2, 3, 4};
  std::vector<std::uint32_t> dup{2, 2};
  std::vector<std::uint32_t> unknown{11};
  auto code_of = [&](const std::vector<std::uint32_t>& t) {
    try {
      select_indices(t, m, r);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InternalFault;
  };
  EXPECT_EQ(code_of(too_many), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of(dup), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of(unknown), ErrorCode::UnknownMailbox);
}

TEST(Selection, EmptyTargetsGiveUniformPositions) {
  Rng r(23);
  auto m = build_mapping(30, 6, test_seed());
  auto sel = select_indices({}, m, r);
  EXPECT_FALSE(sel.all_random);
  for (std::uint32_t b = 1; b <= 6; ++b) EXPECT_FALSE(sel.is_real(b));
}
