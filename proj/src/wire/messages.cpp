#include "pirates/wire/messages.hpp"

#include <cmath>
#include <cstdio>

#include "pirates/common/errors.hpp"

namespace pirates::wire {
namespace {

// Guards vector allocations against hostile counts.
void check_count(const Reader& r, std::uint64_t count, std::size_t min_each) {
  if (min_each > 0 && count > r.remaining() / min_each) {
    throw Error(ErrorCode::Truncated, "element count exceeds payload");
  }
}

void put_endpoint(Writer& w, const Endpoint& e) {
  w.raw(e.ip);
  w.u16(e.port);
}

Endpoint get_endpoint(Reader& r) {
  Endpoint e;
  e.ip = r.fixed<4>();
  e.port = r.u16();
  return e;
}

Role get_role(Reader& r) {
  const auto v = r.u8();
  if (v > 3) throw Error(ErrorCode::InvalidArgument, "role " + std::to_string(v));
  return static_cast<Role>(v);
}

void put_digest(Writer& w, const crypto::Digest& d) { w.raw(d.bytes); }
crypto::Digest get_digest(Reader& r) {
  crypto::Digest d;
  d.bytes = r.fixed<32>();
  return d;
}

}  // namespace

const char* to_string(Role role) {
  switch (role) {
    case Role::Coordinator: return "coordinator";
    case Role::Relay: return "relay";
    case Role::Worker: return "worker";
    case Role::Client: return "client";
  }
  return "unknown";
}

const char* to_string(PhaseCode code) {
  switch (code) {
    case PhaseCode::EpochStart: return "EPOCH_START";
    case PhaseCode::RoundStart: return "ROUND_START";
    case PhaseCode::DialDone: return "DIAL_DONE";
    case PhaseCode::RoundDone: return "ROUND_DONE";
    case PhaseCode::Shutdown: return "SHUTDOWN";
  }
  return "UNKNOWN";
}

void throw_type_mismatch(MessageType got, MessageType want) {
  throw Error(ErrorCode::UnknownType,
              std::string("expected ") + to_string(want) + ", got " + to_string(got));
}

Endpoint Endpoint::parse(const std::string& text) {
  unsigned a, b, c, d, port;
  char tail;
  if (std::sscanf(text.c_str(), "%u.%u.%u.%u:%u%c", &a, &b, &c, &d, &port, &tail) != 5 || a > 255 ||
      b > 255 || c > 255 || d > 255 || port > 65535) {
    throw Error(ErrorCode::InvalidArgument, "bad endpoint '" + text + "'");
  }
  Endpoint e;
  e.ip = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(c),
          static_cast<std::uint8_t>(d)};
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

std::string Endpoint::str() const {
  return std::to_string(ip[0]) + "." + std::to_string(ip[1]) + "." + std::to_string(ip[2]) + "." +
         std::to_string(ip[3]) + ":" + std::to_string(port);
}

// HELLO

Bytes Hello::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(role)).u32(index);
  put_endpoint(w, listen);
  w.raw(token).raw(identity.bytes);
  return std::move(w).take();
}

Hello Hello::decode(ByteView payload) {
  Reader r(payload);
  Hello h;
  h.role = get_role(r);
  h.index = r.u32();
  h.listen = get_endpoint(r);
  h.token = r.fixed<16>();
  h.identity.bytes = r.fixed<32>();
  r.expect_done();
  return h;
}

// REG_INFO

Bytes RegInfo::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(role)).u32(index).raw(token);
  w.u32(relay_index);
  put_endpoint(w, relay);
  w.u32(worker_index);
  put_endpoint(w, worker);
  w.u32(n_mailboxes).u32(static_cast<std::uint32_t>(workers.size()));
  for (const auto& e : workers) put_endpoint(w, e);
  return std::move(w).take();
}

RegInfo RegInfo::decode(ByteView payload) {
  Reader r(payload);
  RegInfo m;
  m.role = get_role(r);
  m.index = r.u32();
  m.token = r.fixed<16>();
  m.relay_index = r.u32();
  m.relay = get_endpoint(r);
  m.worker_index = r.u32();
  m.worker = get_endpoint(r);
  m.n_mailboxes = r.u32();
  const auto count = r.u32();
  check_count(r, count, 6);
  m.workers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.workers.push_back(get_endpoint(r));
  r.expect_done();
  return m;
}

// PHASE_ANNOUNCE

Bytes PhaseAnnounce::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(code)).u64(epoch).u32(round).u32(sender_index);
  w.raw(seed.bytes);
  w.u32(n_mailboxes).u32(n_buckets).u32(n_relays).u32(n_workers).u32(simulated_users).u32(group_size);
  w.u32(schedule.rounds).u32(schedule.round_ms).u32(schedule.snippet_ms).u32(schedule.dial_ms);
  w.u32(schedule.collect_ms).u32(schedule.bitrate_bps);
  w.u32(he.n).u32(he.log_q).u32(he.plain_bits).u32(he.pk_rows);
  w.u32(static_cast<std::uint32_t>(std::lround(he.sigma * 1000.0)));
  w.i64(timestamp_us);
  return std::move(w).take();
}

PhaseAnnounce PhaseAnnounce::decode(ByteView payload) {
  Reader r(payload);
  PhaseAnnounce m;
  const auto code = r.u8();
  if (code < 1 || code > 5) throw Error(ErrorCode::InvalidArgument, "phase code " + std::to_string(code));
  m.code = static_cast<PhaseCode>(code);
  m.epoch = r.u64();
  m.round = r.u32();
  m.sender_index = r.u32();
  m.seed.bytes = r.fixed<16>();
  m.n_mailboxes = r.u32();
  m.n_buckets = r.u32();
  m.n_relays = r.u32();
  m.n_workers = r.u32();
  m.simulated_users = r.u32();
  m.group_size = r.u32();
  m.schedule.rounds = r.u32();
  m.schedule.round_ms = r.u32();
  m.schedule.snippet_ms = r.u32();
  m.schedule.dial_ms = r.u32();
  m.schedule.collect_ms = r.u32();
  m.schedule.bitrate_bps = r.u32();
  m.he.n = r.u32();
  m.he.log_q = r.u32();
  m.he.plain_bits = r.u32();
  m.he.pk_rows = r.u32();
  m.he.sigma = r.u32() / 1000.0;
  m.timestamp_us = r.i64();
  r.expect_done();
  return m;
}

// INVITE_SUBMIT / INVITE_BROADCAST

Bytes InviteSubmit::encode() const {
  Writer w;
  w.u64(epoch).u32(mailbox_id).raw(token);
  put_digest(w, invite);
  return std::move(w).take();
}

InviteSubmit InviteSubmit::decode(ByteView payload) {
  Reader r(payload);
  InviteSubmit m;
  m.epoch = r.u64();
  m.mailbox_id = r.u32();
  m.token = r.fixed<16>();
  m.invite = get_digest(r);
  r.expect_done();
  return m;
}

Bytes InviteBroadcast::encode() const {
  Writer w(16 + invites.size() * 32);
  w.u64(epoch).u32(relay_index).u32(static_cast<std::uint32_t>(invites.size()));
  for (const auto& inv : invites) put_digest(w, inv);
  return std::move(w).take();
}

InviteBroadcast InviteBroadcast::decode(ByteView payload) {
  Reader r(payload);
  InviteBroadcast m;
  m.epoch = r.u64();
  m.relay_index = r.u32();
  const auto count = r.u32();
  check_count(r, count, 32);
  m.invites.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.invites.push_back(get_digest(r));
  r.expect_done();
  return m;
}

// QUERY_SUBMIT

Bytes QuerySubmit::encode(const crypto::HeParams& params) const {
  Writer w;
  w.u64(epoch).u32(client_tag).raw(token).u32(static_cast<std::uint32_t>(queries.size()));
  for (const auto& q : queries) pir::encode_query(params, q, w);
  return std::move(w).take();
}

QuerySubmit QuerySubmit::decode(ByteView payload) {
  Reader r(payload);
  QuerySubmit m;
  m.epoch = r.u64();
  m.client_tag = r.u32();
  m.token = r.fixed<16>();
  const auto count = r.u32();
  check_count(r, count, 12);
  m.queries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.queries.push_back(pir::decode_query(r));
  r.expect_done();
  return m;
}

// SNIPPET_SUBMIT

Bytes SnippetSubmit::encode() const {
  Writer w;
  w.u64(epoch).u32(round).u32(mailbox_id).raw(token).i64(sent_us).blob(ciphertext);
  return std::move(w).take();
}

SnippetSubmit SnippetSubmit::decode(ByteView payload) {
  Reader r(payload);
  SnippetSubmit m;
  m.epoch = r.u64();
  m.round = r.u32();
  m.mailbox_id = r.u32();
  m.token = r.fixed<16>();
  m.sent_us = r.i64();
  auto ct = r.blob();
  m.ciphertext.assign(ct.begin(), ct.end());
  r.expect_done();
  return m;
}

// MAILBOX_BROADCAST

Bytes MailboxBroadcast::encode() const {
  const std::size_t record_size = records.empty() ? 0 : records.front().ciphertext.size();
  Writer w(32 + records.size() * (4 + record_size));
  w.u64(epoch).u32(round).u32(relay_index).i64(sent_us);
  w.u32(static_cast<std::uint32_t>(records.size())).u32(static_cast<std::uint32_t>(record_size));
  for (const auto& rec : records) {
    if (rec.ciphertext.size() != record_size) {
      throw Error(ErrorCode::WrongSize, "mailbox records must share one size");
    }
    w.u32(rec.mailbox_id).raw(rec.ciphertext);
  }
  return std::move(w).take();
}

MailboxBroadcast MailboxBroadcast::decode(ByteView payload) {
  Reader r(payload);
  MailboxBroadcast m;
  m.epoch = r.u64();
  m.round = r.u32();
  m.relay_index = r.u32();
  m.sent_us = r.i64();
  const auto count = r.u32();
  const auto record_size = r.u32();
  check_count(r, count, 4 + std::size_t{record_size});
  m.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    MailboxRecord rec;
    rec.mailbox_id = r.u32();
    auto ct = r.raw(record_size);
    rec.ciphertext.assign(ct.begin(), ct.end());
    m.records.push_back(std::move(rec));
  }
  r.expect_done();
  return m;
}

// ANSWER_SET

Bytes AnswerSet::encode(const crypto::HeParams& params) const {
  Writer w;
  w.u64(epoch).u32(round).u32(client_tag).i64(sent_us).u32(static_cast<std::uint32_t>(answers.size()));
  for (const auto& a : answers) pir::encode_answer(params, a, w);
  return std::move(w).take();
}

AnswerSet AnswerSet::decode(ByteView payload) {
  Reader r(payload);
  AnswerSet m;
  m.epoch = r.u64();
  m.round = r.u32();
  m.client_tag = r.u32();
  m.sent_us = r.i64();
  const auto count = r.u32();
  check_count(r, count, 12);
  m.answers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.answers.push_back(pir::decode_answer(r));
  r.expect_done();
  return m;
}

// BUCKET_LISTS

Bytes BucketLists::encode() const {
  Writer w;
  w.u64(epoch).u32(n_mailboxes).u32(n_simulated).u32(static_cast<std::uint32_t>(lists.size()));
  for (const auto& list : lists) {
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (auto id : list) w.u32(id);
  }
  return std::move(w).take();
}

BucketLists BucketLists::decode(ByteView payload) {
  Reader r(payload);
  BucketLists m;
  m.epoch = r.u64();
  m.n_mailboxes = r.u32();
  m.n_simulated = r.u32();
  const auto count = r.u32();
  check_count(r, count, 4);
  m.lists.resize(count);
  for (auto& list : m.lists) {
    const auto len = r.u32();
    check_count(r, len, 4);
    list.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) list.push_back(r.u32());
  }
  r.expect_done();
  return m;
}

// DIRECTORY

Bytes Directory::encode() const {
  Writer w(12 + entries.size() * 36);
  w.u64(epoch).u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) w.raw(e.identity.bytes).u32(e.mailbox_id);
  return std::move(w).take();
}

Directory Directory::decode(ByteView payload) {
  Reader r(payload);
  Directory m;
  m.epoch = r.u64();
  const auto count = r.u32();
  check_count(r, count, 36);
  m.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    DirectoryEntry e;
    e.identity.bytes = r.fixed<32>();
    e.mailbox_id = r.u32();
    m.entries.push_back(e);
  }
  r.expect_done();
  return m;
}

}  // namespace pirates::wire
