#include <gtest/gtest.h>

#include <functional>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/sym.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/nodes/coordinator.hpp"
#include "pirates/nodes/relay.hpp"
#include "pirates/nodes/worker.hpp"
#include "pirates/pir/pir.hpp"
#include "pirates/wire/snippet.hpp"

using namespace pirates;
using namespace pirates::nodes;
using wire::Role;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalFault;
}

class FixedClock final : public Clock {
 public:
  std::int64_t now_us() const override { return now; }
  std::int64_t now = 1'000'000;
};

wire::PhaseAnnounce epoch_announce(std::uint32_t n, std::uint32_t b, std::uint32_t simulated = 0) {
  wire::PhaseAnnounce a;
  a.code = wire::PhaseCode::EpochStart;
  a.epoch = 1;
  for (std::size_t i = 0; i < a.seed.bytes.size(); ++i) a.seed.bytes[i] = static_cast<std::uint8_t>(i * 7);
  a.n_mailboxes = n;
  a.n_buckets = b;
  a.n_relays = 1;
  a.n_workers = 1;
  a.simulated_users = simulated;
  a.group_size = 3;
  a.schedule.snippet_ms = 60;
  return a;
}

wire::Token token(std::uint8_t v) {
  wire::Token t{};
  t.fill(v);
  return t;
}

wire::Endpoint ep(std::uint16_t port) {
  wire::Endpoint e;
  e.ip = {127, 0, 0, 1};
  e.port = port;
  return e;
}

std::size_t ct_size(const wire::PhaseAnnounce& a) {
  return crypto::SymCipher(wire::snippet_capacity(a.schedule.snippet_ms, a.schedule.bitrate_bps)).ciphertext_size();
}

}  // namespace

TEST(PeerId, PendingIdsAreDistinguishable) {
  auto p = PeerId::pending(Role::Client, 5);
  EXPECT_TRUE(p.is_pending());
  EXPECT_FALSE((PeerId{Role::Client, 5}).is_pending());
  EXPECT_NE(p, (PeerId{Role::Client, 5}));
}

TEST(Phase, AnnouncementsMapToProtocolPhases) {
  wire::PhaseAnnounce a;
  a.code = wire::PhaseCode::EpochStart;
  EXPECT_EQ(phase_of(wire::make_frame(a)), Phase::Mapping);
  a.code = wire::PhaseCode::DialDone;
  EXPECT_EQ(phase_of(wire::make_frame(a)), Phase::Dialing);
  a.code = wire::PhaseCode::RoundStart;
  EXPECT_EQ(phase_of(wire::make_frame(a)), Phase::Communication);
  a.code = wire::PhaseCode::Shutdown;
  EXPECT_EQ(phase_of(wire::make_frame(a)), Phase::Teardown);
  EXPECT_EQ(phase_of(wire::make_frame(wire::Hello{})), Phase::Registration);
}

TEST(Recorder, JsonlRoundTrip) {
  Recorder r;
  r.frame(true, {Role::Worker, 2}, wire::make_frame(wire::Hello{}));
  r.timing("reply_us", 3, 4, 5, 678);
  r.output({1, 2, 3, 4, {9, 8, 7}});
  r.decision({1, 3, "g", true, false, {4, 5}});
  r.event("registered", "3");
  Recorder back;
  EXPECT_EQ(Recorder::read_jsonl(r.to_jsonl("client-3"), back), "client-3");
  ASSERT_EQ(back.frames.size(), 1u);
  EXPECT_EQ(back.frames[0].size, r.frames[0].size);
  EXPECT_EQ(back.frames[0].peer, (PeerId{Role::Worker, 2}));
  ASSERT_EQ(back.timings.size(), 1u);
  EXPECT_EQ(back.timings[0].value, 678);
  ASSERT_EQ(back.outputs.size(), 1u);
  EXPECT_EQ(back.outputs[0].payload, (Bytes{9, 8, 7}));
  ASSERT_EQ(back.decisions.size(), 1u);
  EXPECT_EQ(back.decisions[0].targets, (std::vector<std::uint32_t>{4, 5}));
  ASSERT_EQ(back.events.size(), 1u);
  EXPECT_EQ(back.events[0].detail, "3");
}

TEST(Relay, RejectsUnknownClientsBadTokensAndWrongSizes) {
  FixedClock clock;
  Recorder rec;
  Relay relay({ep(1), ep(2), 1}, clock, rec);
  relay.add_client(1, token(1));
  auto a = epoch_announce(2, 3);
  relay.begin_epoch(a);
  Bytes ct(relay.ciphertext_size(), 0x11);
  EXPECT_EQ(code_of([&] { relay.accept_snippet(1, 1, 2, token(1), ct); }), ErrorCode::UnknownClient);
  EXPECT_EQ(code_of([&] { relay.accept_snippet(1, 1, 1, token(9), ct); }), ErrorCode::BadToken);
  Bytes short_ct(ct.size() - 1);
  EXPECT_EQ(code_of([&] { relay.accept_snippet(1, 1, 1, token(1), short_ct); }), ErrorCode::WrongSize);
  EXPECT_EQ(code_of([&] { relay.accept_snippet(2, 1, 1, token(1), ct); }), ErrorCode::PhaseMissed);
  relay.accept_snippet(1, 1, 1, token(1), ct);
}

TEST(Relay, InvitesAreSortedAndMissingOnesCovered) {
  FixedClock clock;
  Recorder rec;
  Relay relay({ep(1), ep(2), 2}, clock, rec);
  for (std::uint32_t m : {3u, 1u, 2u}) relay.add_client(m, token(static_cast<std::uint8_t>(m)));
  relay.begin_epoch(epoch_announce(3, 3));
  dialing::Invite i3{}, i1{};
  i3.bytes.fill(3);
  i1.bytes.fill(1);
  relay.accept_invite({1, 3, token(3), i3});
  relay.accept_invite({1, 1, token(1), i1});
  EXPECT_EQ(code_of([&] { relay.accept_invite({1, 2, token(7), i1}); }), ErrorCode::BadToken);
  auto b = relay.collect_invites();
  ASSERT_EQ(b.invites.size(), 3u);
  EXPECT_EQ(b.invites[0], i1);
  EXPECT_EQ(b.invites[2], i3);
  EXPECT_NE(b.invites[1], i1);
  EXPECT_NE(b.invites[1], i3);
}

TEST(Relay, MissingSnippetsGetRandomFillAndSimulatedUsersDuplicate) {
  FixedClock clock;
  Recorder rec;
  Relay relay({ep(1), ep(2), 3}, clock, rec);
  relay.add_client(1, token(1));
  relay.add_client(2, token(2));
  relay.add_client(3, token(3));
  // Buckets padded to ceil(3 * 11 / 3) = 11 entries each.
  auto a = epoch_announce(3, 3, 11);
  relay.begin_epoch(a);
  Bytes c1(relay.ciphertext_size(), 0xa1), c2(relay.ciphertext_size(), 0xa2);
  relay.accept_snippet(1, 1, 1, token(1), c1);
  relay.accept_snippet(1, 1, 2, token(2), c2);
  auto b = relay.broadcast_mailboxes(1);

  auto m = mapping::build_mapping(3, 3, a.seed);
  m.add_simulated_users(11);
  for (std::uint32_t k = 1; k <= 3; ++k) EXPECT_EQ(m.bucket(k).size(), 11u);
  ASSERT_EQ(b.records.size(), 3u + m.n_simulated());
  std::map<std::uint32_t, Bytes> by_id;
  for (const auto& r : b.records) {
    EXPECT_EQ(r.ciphertext.size(), relay.ciphertext_size());
    by_id[r.mailbox_id] = r.ciphertext;
  }
  EXPECT_EQ(by_id[1], c1);
  EXPECT_EQ(by_id[2], c2);
  EXPECT_NE(by_id[3], c1);
  for (std::uint32_t v = 4; v <= 3 + m.n_simulated(); ++v) EXPECT_EQ(by_id[v], by_id[m.duplicate_source(v)]);
}

TEST(Worker, ValidatesStoredQueries) {
  FixedClock clock;
  Recorder rec;
  Worker worker({ep(1), ep(3), 1, 0, 4}, clock, rec);
  worker.add_client(1, token(1));
  auto a = epoch_announce(4, 3);
  auto m = mapping::build_mapping(4, 3, a.seed);
  worker.begin_epoch(a, m.bucket_lists());

  Rng rng(8);
  auto keys = pir::pir_setup(128, 8, rng);
  std::vector<pir::PirQuery> qs;
  for (std::uint32_t b = 1; b <= 3; ++b) qs.push_back(pir::pir_query(keys, 1, m.query_length(b), ct_size(a), rng).second);
  EXPECT_EQ(code_of([&] { worker.store_queries(2, token(1), qs); }), ErrorCode::UnknownClient);
  EXPECT_EQ(code_of([&] { worker.store_queries(1, token(2), qs); }), ErrorCode::BadToken);
  auto fewer = qs;
  fewer.pop_back();
  EXPECT_EQ(code_of([&] { worker.store_queries(1, token(1), fewer); }), ErrorCode::WrongQueryCount);
  auto longer = qs;
  longer[0].selection.push_back(longer[0].selection.back());
  EXPECT_EQ(code_of([&] { worker.store_queries(1, token(1), longer); }), ErrorCode::LengthMismatch);
  worker.store_queries(1, token(1), qs);
  EXPECT_EQ(worker.n_stored(), 1u);
}

TEST(Worker, AnswersDecodeToTheRequestedMailboxes) {
  FixedClock clock;
  Recorder rec;
  Worker worker({ep(1), ep(3), 2, 0, 5}, clock, rec);
  worker.add_client(1, token(1));
  auto a = epoch_announce(6, 3);
  auto m = mapping::build_mapping(6, 3, a.seed);
  worker.begin_epoch(a, m.bucket_lists());

  Rng rng(9);
  std::map<std::uint32_t, Bytes> contents;
  for (std::uint32_t id = 1; id <= 6; ++id) contents[id] = rng.bytes(ct_size(a));
  std::vector<std::uint32_t> targets{2, 5};
  auto sel = mapping::select_indices(targets, m, rng);
  ASSERT_FALSE(sel.all_random);
  auto keys = pir::pir_setup(128, 8, rng);
  std::vector<pir::PirState> states;
  std::vector<pir::PirQuery> qs;
  for (std::uint32_t b = 1; b <= 3; ++b) {
    auto [st, q] = pir::pir_query(keys, sel.positions[b - 1], m.query_length(b), ct_size(a), rng);
    q.bucket_index = b;
    q.client_tag = 1;
    states.push_back(st);
    qs.push_back(std::move(q));
  }
  worker.store_queries(1, token(1), qs);
  RoundTiming timing;
  auto sets = worker.answer_round(1, contents, 2, &timing);
  ASSERT_EQ(sets.size(), 1u);
  ASSERT_EQ(sets[0].answers.size(), 3u);
  int real = 0;
  for (std::uint32_t b = 1; b <= 3; ++b) {
    if (!sel.is_real(b)) continue;
    ++real;
    EXPECT_EQ(pir::pir_decode(keys.sk, states[b - 1], sets[0].answers[b - 1]), contents[*sel.targets[b - 1]]);
  }
  EXPECT_EQ(real, 2);
  EXPECT_GE(timing.reply_us, 0);
}

TEST(Coordinator, RegistersServersThenClientsRoundRobin) {
  FixedClock clock;
  Recorder rec;
  CoordinatorConfig cfg;
  cfg.n_relays = 2;
  cfg.n_workers = 1;
  cfg.expected_clients = 3;
  cfg.seed = 1;
  Coordinator c(cfg, clock, rec);
  wire::Hello client_hello;
  client_hello.role = Role::Client;
  EXPECT_EQ(code_of([&] { c.register_client(client_hello); }), ErrorCode::InvalidArgument);

  Outbox out;
  std::uint32_t conn = 0;
  for (auto role : {Role::Relay, Role::Relay, Role::Worker}) {
    wire::Hello h;
    h.role = role;
    h.listen = ep(static_cast<std::uint16_t>(100 + conn));
    c.on_frame(PeerId::pending(role, ++conn), wire::make_frame(h), out);
  }
  EXPECT_TRUE(c.servers_ready());
  auto r1 = c.register_client(client_hello);
  auto r2 = c.register_client(client_hello);
  EXPECT_EQ(r1.index, 1u);
  EXPECT_EQ(r2.index, 2u);
  EXPECT_NE(r1.relay_index, r2.relay_index);
  EXPECT_NE(r1.token, r2.token);
  c.on_frame(PeerId::pending(Role::Client, 50), wire::make_frame(client_hello), out);
  EXPECT_EQ(c.epoch(), 1u);
  EXPECT_EQ(c.mapping().n_mailboxes(), 3u);
  EXPECT_EQ(code_of([&] { c.register_client(client_hello); }), ErrorCode::RegistrationClosed);
}
