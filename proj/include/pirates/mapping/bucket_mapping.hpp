#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pirates/common/bytes.hpp"
#include "pirates/common/rng.hpp"

namespace pirates::mapping {

struct MappingSeed {
  std::array<std::uint8_t, 16> bytes{};
  bool operator==(const MappingSeed&) const = default;
};

// Buckets are numbered 1..B, mailboxes 1..N.
struct BucketTriple {
  std::array<std::uint32_t, 3> buckets{};
  std::uint64_t nonce = 0;
  bool operator==(const BucketTriple&) const = default;
};

// h_k(i | n): first 8 bytes of hash(seed || u8 k || u64be i || u64be n) as a
// big-endian integer, reduced mod B, plus one.
std::uint32_t bucket_hash(const MappingSeed& seed, std::uint8_t k, std::uint64_t mailbox,
                          std::uint64_t nonce, std::uint32_t n_buckets);

// Smallest nonce giving three pairwise distinct buckets. Requires B >= 3.
BucketTriple assign_buckets(std::uint32_t mailbox, const MappingSeed& seed, std::uint32_t n_buckets);

// B = max(3, ceil(1.5 * (G - 1))).
std::uint32_t n_buckets_for(std::uint32_t group_size_max);

class BucketMapping {
 public:
  BucketMapping() = default;
  BucketMapping(std::uint32_t n_mailboxes, std::uint32_t n_buckets,
                std::vector<BucketTriple> assignment,
                std::vector<std::vector<std::uint32_t>> bucket_lists);

  std::uint32_t n_mailboxes() const { return n_mailboxes_; }
  std::uint32_t n_buckets() const { return n_buckets_; }
  // Mailbox ids beyond n_mailboxes() are simulated users; see
  // add_simulated_users.
  std::uint32_t n_simulated() const { return n_simulated_; }

  const BucketTriple& assignment(std::uint32_t mailbox) const;
  // Ordered mailbox list of bucket b (1-based).
  const std::vector<std::uint32_t>& bucket(std::uint32_t b) const;
  const std::vector<std::vector<std::uint32_t>>& bucket_lists() const { return bucket_lists_; }

  // 1-based position of mailbox in bucket b, if present.
  std::optional<std::uint32_t> position_of(std::uint32_t b, std::uint32_t mailbox) const;
  // Number of PIR selection components for bucket b. Empty buckets still
  // carry one placeholder item so every bucket can be queried.
  std::uint32_t query_length(std::uint32_t b) const;

  // Pads every bucket to ceil(3 * users / B) entries with simulated mailbox
  // ids n_mailboxes()+1, n_mailboxes()+2, ... assigned bucket by bucket.
  void add_simulated_users(std::uint32_t users);
  // Real mailbox whose content a simulated entry duplicates.
  std::uint32_t duplicate_source(std::uint32_t simulated_id) const;

  bool operator==(const BucketMapping&) const = default;

 private:
  std::uint32_t n_mailboxes_ = 0;
  std::uint32_t n_buckets_ = 0;
  std::uint32_t n_simulated_ = 0;
  std::vector<BucketTriple> assignment_;
  std::vector<std::vector<std::uint32_t>> bucket_lists_;
};

// Requires N >= 1 and B >= 3. Bucket lists are sorted ascending.
BucketMapping build_mapping(std::uint32_t n_mailboxes, std::uint32_t n_buckets, const MappingSeed& seed);

struct IndexSelection {
  // Per bucket (index b-1): 1-based position within the bucket.
  std::vector<std::uint32_t> positions;
  // Per bucket: targeted mailbox when the position is a real retrieval.
  std::vector<std::optional<std::uint32_t>> targets;
  // Set when some target could not be placed, in which case every position
  // is random.
  bool all_random = false;

  bool is_real(std::uint32_t b) const { return targets.at(b - 1).has_value(); }
};

// Assigns each target to a distinct bucket among its three (maximum
// bipartite matching) and fills the rest with uniform random positions.
// Throws UnknownMailbox for ids outside the mapping and InvalidArgument for
// more targets than buckets or duplicate targets.
IndexSelection select_indices(std::span<const std::uint32_t> targets, const BucketMapping& mapping,
                              Rng& rng);

// Target -> bucket assignment (0-based bucket indices) of a maximum matching
// on the target x bucket graph; entries are -1 for unmatched targets.
std::vector<int> max_bipartite_matching(const std::vector<std::vector<int>>& adjacency,
                                        int n_right);

}  // namespace pirates::mapping
