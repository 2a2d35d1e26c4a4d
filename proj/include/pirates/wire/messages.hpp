#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pirates/common/bytes.hpp"
#include "pirates/crypto/lwe.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/pir/pir.hpp"
#include "pirates/wire/frame.hpp"

namespace pirates::wire {

// All integers are big-endian. Every payload is fully consumed on decode;
// leftovers raise TrailingBytes.

enum class Role : std::uint8_t { Coordinator = 0, Relay = 1, Worker = 2, Client = 3 };
const char* to_string(Role role);

using Token = std::array<std::uint8_t, 16>;

// IPv4 address and port; always 6 bytes on the wire.
struct Endpoint {
  std::array<std::uint8_t, 4> ip{};
  std::uint16_t port = 0;

  static Endpoint parse(const std::string& text);  // "a.b.c.d:port"
  std::string str() const;
  bool operator==(const Endpoint&) const = default;
};

inline constexpr std::uint32_t kUnassigned = 0xffffffffu;

struct Hello {
  static constexpr MessageType kType = MessageType::Hello;
  Role role = Role::Client;
  std::uint32_t index = kUnassigned;  // mailbox id or server index once assigned
  Endpoint listen;
  Token token{};
  dialing::PublicKey identity;

  Bytes encode() const;
  static Hello decode(ByteView payload);
  bool operator==(const Hello&) const = default;
};

// Registration result. Sent by the coordinator to the registrant and, for
// clients, forwarded to the assigned relay and worker. index == 0 with
// role Client means the registration was rejected.
struct RegInfo {
  static constexpr MessageType kType = MessageType::RegInfo;
  Role role = Role::Client;
  std::uint32_t index = 0;
  Token token{};
  std::uint32_t relay_index = 0;
  Endpoint relay;
  std::uint32_t worker_index = 0;
  Endpoint worker;
  std::uint32_t n_mailboxes = 0;
  std::vector<Endpoint> workers;

  Bytes encode() const;
  static RegInfo decode(ByteView payload);
  bool operator==(const RegInfo&) const = default;
};

enum class PhaseCode : std::uint8_t {
  EpochStart = 1,
  RoundStart = 2,
  DialDone = 3,
  RoundDone = 4,
  Shutdown = 5,
};
const char* to_string(PhaseCode code);

struct Schedule {
  std::uint32_t rounds = 10;
  std::uint32_t round_ms = 250;
  std::uint32_t snippet_ms = 250;
  std::uint32_t dial_ms = 5000;     // invite and query collection window
  std::uint32_t collect_ms = 2000;  // per-round snippet window at relays
  std::uint32_t bitrate_bps = 1600;
  bool operator==(const Schedule&) const = default;
};

struct PhaseAnnounce {
  static constexpr MessageType kType = MessageType::PhaseAnnounce;
  PhaseCode code = PhaseCode::EpochStart;
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t sender_index = 0;
  mapping::MappingSeed seed;
  std::uint32_t n_mailboxes = 0;
  std::uint32_t n_buckets = 0;
  std::uint32_t n_relays = 0;
  std::uint32_t n_workers = 0;
  std::uint32_t simulated_users = 0;
  std::uint32_t group_size = 0;
  Schedule schedule;
  crypto::HeParams he;
  std::int64_t timestamp_us = 0;

  Bytes encode() const;
  static PhaseAnnounce decode(ByteView payload);
  bool operator==(const PhaseAnnounce&) const = default;
};

struct InviteSubmit {
  static constexpr MessageType kType = MessageType::InviteSubmit;
  std::uint64_t epoch = 0;
  std::uint32_t mailbox_id = 0;
  Token token{};
  dialing::Invite invite;

  Bytes encode() const;
  static InviteSubmit decode(ByteView payload);
  bool operator==(const InviteSubmit&) const = default;
};

struct InviteBroadcast {
  static constexpr MessageType kType = MessageType::InviteBroadcast;
  std::uint64_t epoch = 0;
  std::uint32_t relay_index = 0;
  std::vector<dialing::Invite> invites;

  Bytes encode() const;
  static InviteBroadcast decode(ByteView payload);
  bool operator==(const InviteBroadcast&) const = default;
};

struct QuerySubmit {
  static constexpr MessageType kType = MessageType::QuerySubmit;
  std::uint64_t epoch = 0;
  std::uint32_t client_tag = 0;
  Token token{};
  std::vector<pir::PirQuery> queries;  // one per bucket, in bucket order

  Bytes encode(const crypto::HeParams& params) const;
  static QuerySubmit decode(ByteView payload);
};

struct SnippetSubmit {
  static constexpr MessageType kType = MessageType::SnippetSubmit;
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t mailbox_id = 0;
  Token token{};
  std::int64_t sent_us = 0;
  Bytes ciphertext;

  Bytes encode() const;
  static SnippetSubmit decode(ByteView payload);
  bool operator==(const SnippetSubmit&) const = default;
};

struct MailboxRecord {
  std::uint32_t mailbox_id = 0;
  Bytes ciphertext;
  bool operator==(const MailboxRecord&) const = default;
};

// Records share one size, written once.
struct MailboxBroadcast {
  static constexpr MessageType kType = MessageType::MailboxBroadcast;
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t relay_index = 0;
  std::int64_t sent_us = 0;
  std::vector<MailboxRecord> records;

  Bytes encode() const;
  static MailboxBroadcast decode(ByteView payload);
  bool operator==(const MailboxBroadcast&) const = default;
};

struct AnswerSet {
  static constexpr MessageType kType = MessageType::AnswerSet;
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t client_tag = 0;
  std::int64_t sent_us = 0;
  std::vector<pir::PirAnswer> answers;  // one per bucket

  Bytes encode(const crypto::HeParams& params) const;
  static AnswerSet decode(ByteView payload);
};

struct BucketLists {
  static constexpr MessageType kType = MessageType::BucketLists;
  std::uint64_t epoch = 0;
  std::uint32_t n_mailboxes = 0;
  std::uint32_t n_simulated = 0;
  std::vector<std::vector<std::uint32_t>> lists;

  Bytes encode() const;
  static BucketLists decode(ByteView payload);
  bool operator==(const BucketLists&) const = default;
};

struct DirectoryEntry {
  dialing::PublicKey identity;
  std::uint32_t mailbox_id = 0;
  bool operator==(const DirectoryEntry&) const = default;
};

struct Directory {
  static constexpr MessageType kType = MessageType::Directory;
  std::uint64_t epoch = 0;
  std::vector<DirectoryEntry> entries;

  Bytes encode() const;
  static Directory decode(ByteView payload);
  bool operator==(const Directory&) const = default;
};

template <class M>
Frame make_frame(const M& message) {
  return Frame{M::kType, message.encode()};
}
template <class M>
Frame make_frame(const M& message, const crypto::HeParams& params) {
  return Frame{M::kType, message.encode(params)};
}

[[noreturn]] void throw_type_mismatch(MessageType got, MessageType want);

// Decodes a frame payload after checking its type.
template <class M>
M parse(const Frame& frame) {
  if (frame.type != M::kType) throw_type_mismatch(frame.type, M::kType);
  return M::decode(frame.payload);
}

}  // namespace pirates::wire
