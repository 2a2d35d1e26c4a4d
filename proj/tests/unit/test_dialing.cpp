#include <gtest/gtest.h>

#include "oracle_vectors.hpp"
#include "pirates/dialing/gaddra.hpp"
#include "pirates/dialing/invite.hpp"

using namespace pirates;
using namespace pirates::dialing;

namespace {

PublicKey key_of(std::uint8_t tag) {
  PublicKey k;
  k.bytes.fill(tag);
  return k;
}

crypto::GroupMasterKey gmk_of(std::uint8_t tag) {
  crypto::GroupMasterKey k;
  k.bytes.fill(tag);
  return k;
}

GroupDescriptor group(const std::string& id, std::uint8_t gmk, std::vector<std::uint8_t> members,
                      std::size_t me) {
  GroupDescriptor g;
  g.id = id;
  g.gmk = gmk_of(gmk);
  for (auto m : members) g.members.push_back(key_of(m));
  g.my_index = me;
  return g;
}

}  // namespace

TEST(Invite, MatchesReference) {
  crypto::GroupMasterKey gmk;
  PublicKey pk;
  for (int i = 0; i < 32; ++i) {
    gmk.bytes[i] = static_cast<std::uint8_t>(i);
    pk.bytes[i] = static_cast<std::uint8_t>(32 + i);
  }
  EXPECT_EQ(make_invite(gmk, pk, 5).hex(), oracle::kInviteE5);
  EXPECT_NE(make_invite(gmk, pk, 5), make_invite(gmk, pk, 6));
}

TEST(Invite, ProcessFindsOnlyOtherMembers) {
  // I am member index 0 (key 1) of group A {1,2,3}; member 2 dials.
  auto a = group("a", 10, {1, 2, 3}, 0);
  auto b = group("b", 11, {1, 4}, 0);
  std::vector<GroupDescriptor> mine{a, b};
  Rng r(1);
  std::vector<Invite> received{make_cover_invite(r), make_invite(a.gmk, key_of(2), 3),
                               make_invite(a.gmk, key_of(1), 3), make_cover_invite(r)};
  auto matches = process_invites(InviteSet(received), mine, 3);
  ASSERT_EQ(matches.size(), 1u);
  EXPECT_EQ(matches[0].group, 0u);
  ASSERT_EQ(matches[0].matched.size(), 1u);
  EXPECT_EQ(matches[0].matched[0], make_invite(a.gmk, key_of(2), 3));
  // Wrong epoch does not match.
  EXPECT_TRUE(process_invites(InviteSet(received), mine, 4).empty());
}

TEST(Invite, ChooseCallPicksSmallestDigest) {
  Invite lo, hi;
  lo.bytes[0] = 0x01;
  hi.bytes[0] = 0x02;
  std::vector<GroupMatch> c{{0, {hi}}, {1, {hi, lo}}};
  auto d = choose_call(c);
  ASSERT_TRUE(d.group.has_value());
  EXPECT_EQ(*d.group, 1u);
  EXPECT_EQ(d.winning, lo);
  EXPECT_EQ(d.epoch_iv[0], 0x01);
  EXPECT_FALSE(choose_call({}).group.has_value());
}

TEST(Invite, MembersAgreeOnEpochIv) {
  // Two members dial the same group; everyone, including callers who add
  // their own invite, must land on the same minimum digest.
  auto base = group("g", 20, {1, 2, 3}, 0);
  const std::uint64_t e = 9;
  std::vector<Invite> received{make_invite(base.gmk, key_of(1), e), make_invite(base.gmk, key_of(2), e)};
  InviteSet set(received);
  std::optional<crypto::Iv> agreed;
  for (std::size_t me = 0; me < 3; ++me) {
    auto g = base;
    g.my_index = me;
    std::vector<GroupDescriptor> mine{g};
    auto matches = process_invites(set, mine, e);
    if (me < 2) {
      if (matches.empty()) matches.push_back({0, {}});
      matches[0].matched.push_back(make_invite(g.gmk, g.self(), e));
    }
    auto d = choose_call(matches);
    ASSERT_TRUE(d.group.has_value());
    if (agreed) EXPECT_EQ(*agreed, d.epoch_iv);
    agreed = d.epoch_iv;
  }
}

TEST(Gaddra, DetectsOnlyOwnGroups) {
  Rng r(2);
  std::vector<GroupDescriptor> mine{group("a", 30, {1, 2}, 0), group("b", 31, {1, 3}, 0),
                                    group("c", 32, {1, 4}, 0)};
  std::vector<GaddraInvite> received;
  for (int i = 0; i < 20; ++i) received.push_back(gaddra_make_invite(gmk_of(99), r));
  received.push_back(gaddra_make_invite(mine[1].gmk, r));
  auto hits = gaddra_process(received, mine);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], 1u);
}
