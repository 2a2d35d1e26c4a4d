#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pirates/common/rng.hpp"
#include "pirates/crypto/hash.hpp"
#include "pirates/crypto/sym.hpp"

namespace pirates::dialing {

using Invite = crypto::Digest;
using EpochNumber = std::uint64_t;

// Long-term client identity. Only its bytes enter the protocol (invite
// derivation and the mailbox directory).
struct PublicKey {
  std::array<std::uint8_t, 32> bytes{};
  auto operator<=>(const PublicKey&) const = default;
};

struct GroupDescriptor {
  std::string id;
  crypto::GroupMasterKey gmk;
  std::vector<PublicKey> members;
  std::size_t my_index = 0;

  const PublicKey& self() const { return members.at(my_index); }
};

// Length of GMK || pk || u64be(e); cover invites hash a random string of this
// length.
inline constexpr std::size_t kInvitePreimageSize = 32 + 32 + 8;

// H(GMK_g || pk || u64be(e)).
Invite make_invite(const crypto::GroupMasterKey& gmk, const PublicKey& pk, EpochNumber epoch);
Invite make_cover_invite(Rng& rng);

// Received invites with expected O(1) membership tests.
class InviteSet {
 public:
  InviteSet() = default;
  explicit InviteSet(std::span<const Invite> invites);
  void insert(const Invite& invite) { set_.insert(invite); }
  bool contains(const Invite& invite) const { return set_.contains(invite); }
  std::size_t size() const { return set_.size(); }

 private:
  std::unordered_set<Invite, crypto::DigestHasher> set_;
};

struct GroupMatch {
  std::size_t group = 0;  // index into the caller's group list
  std::vector<Invite> matched;
};

// For each group, the reference invites of the other members that appear in
// `received`. Groups without a match are omitted. Costs G-1 hashes and
// lookups per group.
std::vector<GroupMatch> process_invites(const InviteSet& received,
                                        std::span<const GroupDescriptor> my_groups,
                                        EpochNumber epoch);

struct DialDecision {
  std::optional<std::size_t> group;
  crypto::Iv epoch_iv{};
  Invite winning{};
};

// Accepts the candidate whose smallest matched digest is numerically
// smallest; the epoch IV is the first 16 bytes of that digest.
DialDecision choose_call(std::span<const GroupMatch> candidates);

}  // namespace pirates::dialing
