#include "pirates/dialing/invite.hpp"

#include <algorithm>

namespace pirates::dialing {

Invite make_invite(const crypto::GroupMasterKey& gmk, const PublicKey& pk, EpochNumber epoch) {
  Writer w(8);
  w.u64(epoch);
  return crypto::hash({gmk.bytes, pk.bytes, w.bytes()});
}

Invite make_cover_invite(Rng& rng) {
  std::array<std::uint8_t, kInvitePreimageSize> r{};
  rng.fill(r);
  return crypto::hash(r);
}

InviteSet::InviteSet(std::span<const Invite> invites) {
  set_.reserve(invites.size());
  for (const auto& i : invites) set_.insert(i);
}

std::vector<GroupMatch> process_invites(const InviteSet& received,
                                        std::span<const GroupDescriptor> my_groups,
                                        EpochNumber epoch) {
  std::vector<GroupMatch> out;
  for (std::size_t g = 0; g < my_groups.size(); ++g) {
    const auto& group = my_groups[g];
    GroupMatch match{g, {}};
    for (std::size_t m = 0; m < group.members.size(); ++m) {
      if (m == group.my_index) continue;
      auto ref = make_invite(group.gmk, group.members[m], epoch);
      if (received.contains(ref)) match.matched.push_back(ref);
    }
    if (!match.matched.empty()) out.push_back(std::move(match));
  }
  return out;
}

DialDecision choose_call(std::span<const GroupMatch> candidates) {
  DialDecision decision;
  for (const auto& c : candidates) {
    if (c.matched.empty()) continue;
    const Invite& best = *std::min_element(c.matched.begin(), c.matched.end());
    if (!decision.group || best < decision.winning) {
      decision.group = c.group;
      decision.winning = best;
    }
  }
  if (decision.group) {
    std::copy_n(decision.winning.bytes.begin(), decision.epoch_iv.size(), decision.epoch_iv.begin());
  }
  return decision;
}

}  // namespace pirates::dialing
