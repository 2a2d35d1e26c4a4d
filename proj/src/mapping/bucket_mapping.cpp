#include "pirates/mapping/bucket_mapping.hpp"

#include <algorithm>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/hash.hpp"

namespace pirates::mapping {

namespace {
constexpr std::uint64_t kMaxNonceTrials = 10'000;
}

std::uint32_t bucket_hash(const MappingSeed& seed, std::uint8_t k, std::uint64_t mailbox,
                          std::uint64_t nonce, std::uint32_t n_buckets) {
  Writer w(17);
  w.u8(k).u64(mailbox).u64(nonce);
  auto d = crypto::hash({seed.bytes, w.bytes()});
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[i];
  return static_cast<std::uint32_t>(v % n_buckets) + 1;
}

BucketTriple assign_buckets(std::uint32_t mailbox, const MappingSeed& seed, std::uint32_t n_buckets) {
  if (n_buckets < 3) throw Error(ErrorCode::InvalidArgument, "3-way hashing needs B >= 3");
  for (std::uint64_t nonce = 0; nonce < kMaxNonceTrials; ++nonce) {
    BucketTriple t;
    t.nonce = nonce;
    for (std::uint8_t k = 0; k < 3; ++k) t.buckets[k] = bucket_hash(seed, k, mailbox, nonce, n_buckets);
    if (t.buckets[0] != t.buckets[1] && t.buckets[0] != t.buckets[2] && t.buckets[1] != t.buckets[2]) {
      return t;
    }
  }
  throw Error(ErrorCode::InternalFault, "no distinct bucket triple within nonce cap");
}

std::uint32_t n_buckets_for(std::uint32_t group_size_max) {
  if (group_size_max < 2) throw Error(ErrorCode::InvalidArgument, "group size must be >= 2");
  // ceil(1.5 * (G - 1)) == ceil(3 * (G - 1) / 2)
  std::uint32_t b = (3 * (group_size_max - 1) + 1) / 2;
  return std::max<std::uint32_t>(3, b);
}

BucketMapping::BucketMapping(std::uint32_t n_mailboxes, std::uint32_t n_buckets,
                             std::vector<BucketTriple> assignment,
                             std::vector<std::vector<std::uint32_t>> bucket_lists)
    : n_mailboxes_(n_mailboxes),
      n_buckets_(n_buckets),
      assignment_(std::move(assignment)),
      bucket_lists_(std::move(bucket_lists)) {
  if (assignment_.size() != n_mailboxes_ || bucket_lists_.size() != n_buckets_) {
    throw Error(ErrorCode::InvalidArgument, "mapping shape");
  }
}

const BucketTriple& BucketMapping::assignment(std::uint32_t mailbox) const {
  if (mailbox < 1 || mailbox > n_mailboxes_) {
    throw Error(ErrorCode::UnknownMailbox, "mailbox " + std::to_string(mailbox));
  }
  return assignment_[mailbox - 1];
}

const std::vector<std::uint32_t>& BucketMapping::bucket(std::uint32_t b) const {
  if (b < 1 || b > n_buckets_) throw Error(ErrorCode::IndexOutOfRange, "bucket " + std::to_string(b));
  return bucket_lists_[b - 1];
}

std::optional<std::uint32_t> BucketMapping::position_of(std::uint32_t b, std::uint32_t mailbox) const {
  const auto& list = bucket(b);
  auto it = std::lower_bound(list.begin(), list.end(), mailbox);
  if (it == list.end() || *it != mailbox) return std::nullopt;
  return static_cast<std::uint32_t>(it - list.begin()) + 1;
}

std::uint32_t BucketMapping::query_length(std::uint32_t b) const {
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(bucket(b).size()));
}

void BucketMapping::add_simulated_users(std::uint32_t users) {
  if (users == 0) return;
  const std::uint32_t target = (3 * users + n_buckets_ - 1) / n_buckets_;
  std::uint32_t next = n_mailboxes_ + n_simulated_ + 1;
  for (auto& list : bucket_lists_) {
    while (list.size() < target) {
      list.push_back(next++);
      ++n_simulated_;
    }
  }
}

std::uint32_t BucketMapping::duplicate_source(std::uint32_t simulated_id) const {
  if (simulated_id <= n_mailboxes_ || simulated_id > n_mailboxes_ + n_simulated_) {
    throw Error(ErrorCode::UnknownMailbox, "not a simulated id: " + std::to_string(simulated_id));
  }
  return (simulated_id - n_mailboxes_ - 1) % n_mailboxes_ + 1;
}

BucketMapping build_mapping(std::uint32_t n_mailboxes, std::uint32_t n_buckets, const MappingSeed& seed) {
  if (n_mailboxes < 1) throw Error(ErrorCode::InvalidArgument, "need at least one mailbox");
  std::vector<BucketTriple> assignment;
  assignment.reserve(n_mailboxes);
  std::vector<std::vector<std::uint32_t>> lists(n_buckets);
  for (std::uint32_t i = 1; i <= n_mailboxes; ++i) {
    assignment.push_back(assign_buckets(i, seed, n_buckets));
    // Mailboxes are visited in ascending order, so lists stay sorted.
    for (auto b : assignment.back().buckets) lists[b - 1].push_back(i);
  }
  return BucketMapping(n_mailboxes, n_buckets, std::move(assignment), std::move(lists));
}

IndexSelection select_indices(std::span<const std::uint32_t> targets, const BucketMapping& mapping,
                              Rng& rng) {
  const std::uint32_t n_buckets = mapping.n_buckets();
  if (targets.size() > n_buckets) throw Error(ErrorCode::InvalidArgument, "more targets than buckets");
  std::vector<std::vector<int>> adjacency;
  adjacency.reserve(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (std::find(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(t), targets[t]) !=
        targets.begin() + static_cast<std::ptrdiff_t>(t)) {
      throw Error(ErrorCode::InvalidArgument, "duplicate target " + std::to_string(targets[t]));
    }
    const auto& triple = mapping.assignment(targets[t]);
    std::vector<int> edges;
    for (auto b : triple.buckets) edges.push_back(static_cast<int>(b) - 1);
    adjacency.push_back(std::move(edges));
  }

  auto match = max_bipartite_matching(adjacency, static_cast<int>(n_buckets));
  const bool complete = std::all_of(match.begin(), match.end(), [](int b) { return b >= 0; });

  IndexSelection sel;
  sel.positions.resize(n_buckets);
  sel.targets.assign(n_buckets, std::nullopt);
  sel.all_random = !complete;
  if (complete) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto b = static_cast<std::uint32_t>(match[t]) + 1;
      sel.targets[b - 1] = targets[t];
    }
  }
  for (std::uint32_t b = 1; b <= n_buckets; ++b) {
    if (sel.targets[b - 1]) {
      sel.positions[b - 1] = *mapping.position_of(b, *sel.targets[b - 1]);
    } else {
      sel.positions[b - 1] = static_cast<std::uint32_t>(rng.uniform(mapping.query_length(b))) + 1;
    }
  }
  return sel;
}

}  // namespace pirates::mapping
