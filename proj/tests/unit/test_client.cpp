#include <gtest/gtest.h>

#include <functional>
#include <variant>

#include "pirates/common/errors.hpp"
#include "pirates/client/client.hpp"
#include "pirates/client/mix.hpp"
#include "pirates/wire/messages.hpp"

using namespace pirates;
using namespace pirates::client;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalFault;
}

dialing::PublicKey key(std::uint8_t v) {
  dialing::PublicKey k;
  k.bytes.fill(v);
  return k;
}

Bytes pcm(std::initializer_list<std::int16_t> samples) {
  Bytes out;
  for (auto s : samples) {
    const auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

class FixedClock final : public nodes::Clock {
 public:
  std::int64_t now_us() const override { return 5; }
};

}  // namespace

TEST(Plan, ParsesDialIdleHangupAndSilent) {
  auto plan = parse_plan("g1,-,g2/3,!");
  ASSERT_EQ(plan.size(), 4u);
  EXPECT_EQ(plan[0].dial, "g1");
  EXPECT_EQ(plan[0].hangup_after, 0u);
  EXPECT_FALSE(plan[1].dial);
  EXPECT_FALSE(plan[1].silent);
  EXPECT_EQ(plan[2].dial, "g2");
  EXPECT_EQ(plan[2].hangup_after, 3u);
  EXPECT_TRUE(plan[3].silent);
  EXPECT_TRUE(parse_plan("").empty());
  EXPECT_EQ(code_of([] { parse_plan("g1/x"); }), ErrorCode::InvalidArgument);
}

TEST(GroupFile, RoundTripsAndLocatesSelf) {
  dialing::GroupDescriptor a;
  a.id = "alpha";
  a.gmk.bytes.fill(0x42);
  a.members = {key(1), key(2), key(3)};
  dialing::GroupDescriptor b;
  b.id = "beta";
  b.gmk.bytes.fill(0x17);
  b.members = {key(3), key(4)};
  const auto text = "# groups\n" + format_group_file({a, b});
  auto back = parse_group_file(text, key(3));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, "alpha");
  EXPECT_EQ(back[0].gmk, a.gmk);
  EXPECT_EQ(back[0].members, a.members);
  EXPECT_EQ(back[0].my_index, 2u);
  EXPECT_EQ(back[1].my_index, 0u);
  EXPECT_EQ(code_of([&] { parse_group_file(text, key(1)); }), ErrorCode::InvalidArgument);
}

TEST(Mix, PcmSumsWithSaturation) {
  std::vector<Bytes> in{pcm({1000, 30000, -30000}), pcm({-400, 10000, -10000, 7})};
  EXPECT_EQ(mix_pcm(in), pcm({600, 32767, -32768, 7}));
  std::vector<Bytes> odd{Bytes{1, 0, 9}};
  EXPECT_EQ(mix_pcm(odd), pcm({1}));
  EXPECT_TRUE(mix_pcm(std::vector<Bytes>{}).empty());
}

TEST(Mix, RecordsRoundTrip) {
  std::vector<std::pair<std::uint32_t, Bytes>> in{{7, {1, 2, 3}}, {2, {}}, {300000, Bytes(40, 9)}};
  auto mixed = mix_records(in);
  EXPECT_EQ(mixed.size(), 3 * 6 + 3 + 40u);
  EXPECT_EQ(split_records(mixed), in);
  mixed.pop_back();
  EXPECT_ANY_THROW(split_records(mixed));
}

TEST(Voice, DeterministicAndDistinct) {
  EXPECT_EQ(synthetic_voice(3, 1, 2, 100), synthetic_voice(3, 1, 2, 100));
  EXPECT_EQ(synthetic_voice(3, 1, 2, 100).size(), 100u);
  EXPECT_NE(synthetic_voice(3, 1, 2, 64), synthetic_voice(4, 1, 2, 64));
  EXPECT_NE(synthetic_voice(3, 1, 2, 64), synthetic_voice(3, 2, 2, 64));
  EXPECT_NE(synthetic_voice(3, 1, 2, 64), synthetic_voice(3, 1, 3, 64));
  auto v = synthetic_voice(1, 1, 1, 70);
  EXPECT_TRUE(std::equal(v.begin(), v.begin() + 6, v.begin() + 64));
}

TEST(Client, HelloThenRegistration) {
  FixedClock clock;
  nodes::Recorder rec;
  ClientConfig cfg;
  cfg.identity = key(5);
  cfg.seed = 3;
  Client c(cfg, clock, rec, 9);
  EXPECT_TRUE(c.id().is_pending());
  nodes::Outbox out;
  c.start(out);
  ASSERT_EQ(out.actions().size(), 2u);
  EXPECT_TRUE(std::holds_alternative<nodes::Outbox::Connect>(out.actions()[0]));
  const auto& send = std::get<nodes::Outbox::Send>(out.actions()[1]);
  auto hello = wire::parse<wire::Hello>(send.frame);
  EXPECT_EQ(hello.identity, key(5));

  out.clear();
  wire::RegInfo info;
  info.index = 4;
  info.relay_index = 1;
  c.on_frame(PeerId::coordinator(), wire::make_frame(info), out);
  EXPECT_EQ(c.mailbox(), 4u);
  EXPECT_EQ(c.id(), (PeerId{wire::Role::Client, 4}));
  EXPECT_FALSE(c.rejected());
}

TEST(Client, RejectedRegistrationFinishes) {
  FixedClock clock;
  nodes::Recorder rec;
  Client c(ClientConfig{}, clock, rec);
  nodes::Outbox out;
  c.on_frame(PeerId::coordinator(), wire::make_frame(wire::RegInfo{}), out);
  EXPECT_TRUE(c.rejected());
  EXPECT_TRUE(c.finished());
}
