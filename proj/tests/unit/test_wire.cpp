#include <gtest/gtest.h>

#include <functional>

#include "pirates/common/errors.hpp"
#include "pirates/wire/frame.hpp"
#include "pirates/wire/messages.hpp"
#include "pirates/wire/snippet.hpp"

using namespace pirates;
using namespace pirates::wire;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InternalFault;
}

}  // namespace

TEST(Frame, HeaderLayout) {
  Bytes payload{0xaa, 0xbb, 0xcc};
  auto bytes = encode_frame(MessageType::InviteSubmit, payload);
  EXPECT_EQ(to_hex(bytes), "0000000304aabbcc");
  std::size_t consumed = 0;
  auto f = decode_frame(bytes, consumed);
  EXPECT_EQ(consumed, 8u);
  EXPECT_EQ(f.type, MessageType::InviteSubmit);
  EXPECT_EQ(f.payload, payload);
}

TEST(Frame, Errors) {
  std::size_t consumed = 0;
  EXPECT_EQ(code_of([&] { decode_frame(from_hex("00000003"), consumed); }), ErrorCode::Truncated);
  EXPECT_EQ(code_of([&] { decode_frame(from_hex("0000000104"), consumed); }), ErrorCode::Truncated);
  EXPECT_EQ(code_of([&] { decode_frame(from_hex("000000000c"), consumed); }), ErrorCode::UnknownType);
  EXPECT_EQ(code_of([&] { decode_frame(from_hex("0000000000"), consumed); }), ErrorCode::UnknownType);
  EXPECT_EQ(code_of([&] { decode_frame(from_hex("0000001001"), consumed, 8); }), ErrorCode::OversizeFrame);
  Bytes big(9);
  EXPECT_EQ(code_of([&] { encode_frame(MessageType::Hello, big, 8); }), ErrorCode::OversizeFrame);
}

TEST(Frame, StreamDecoderHandlesArbitrarySplits) {
  Bytes stream;
  std::vector<Frame> sent;
  Rng r(3);
  for (int i = 0; i < 30; ++i) {
    Frame f{static_cast<MessageType>(1 + r.uniform(11)), r.bytes(r.uniform(300))};
    auto enc = encode_frame(f);
    stream.insert(stream.end(), enc.begin(), enc.end());
    sent.push_back(std::move(f));
  }
  FrameDecoder dec;
  std::vector<Frame> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    std::size_t chunk = std::min<std::size_t>(1 + r.uniform(97), stream.size() - pos);
    dec.feed(ByteView(stream).subspan(pos, chunk));
    pos += chunk;
    while (auto f = dec.next()) got.push_back(std::move(*f));
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(dec.buffered(), 0u);
}

TEST(Snippet, CapacityAndPadding) {
  EXPECT_EQ(snippet_capacity(250), 50u);
  EXPECT_EQ(snippet_capacity(40), 8u);
  EXPECT_EQ(snippet_capacity(45), 9u);
  auto padded = pad_snippet(as_bytes("abc"), 10);
  EXPECT_EQ(to_hex(padded), "00036162630000000000");
  EXPECT_EQ(unpad_snippet(padded), Bytes({'a', 'b', 'c'}));
  EXPECT_EQ(code_of([] { pad_snippet(Bytes(9), 10); }), ErrorCode::Oversize);
  EXPECT_EQ(pad_snippet(Bytes(8, 1), 10).size(), 10u);
}

TEST(Messages, RoundTripAll) {
  Rng r(4);
  Hello h;
  h.role = Role::Relay;
  h.index = 3;
  h.listen = Endpoint::parse("127.0.0.1:9000");
  h.token = r.array<16>();
  h.identity.bytes = r.array<32>();
  EXPECT_EQ(Hello::decode(h.encode()), h);
  EXPECT_EQ(h.listen.str(), "127.0.0.1:9000");

  RegInfo ri;
  ri.index = 7;
  ri.token = r.array<16>();
  ri.relay = Endpoint::parse("10.0.0.1:1");
  ri.workers = {Endpoint::parse("10.0.0.2:2"), Endpoint::parse("10.0.0.3:3")};
  EXPECT_EQ(RegInfo::decode(ri.encode()), ri);

  PhaseAnnounce pa;
  pa.code = PhaseCode::RoundStart;
  pa.epoch = 2;
  pa.round = 5;
  pa.seed.bytes = r.array<16>();
  pa.n_mailboxes = 100;
  pa.timestamp_us = -5;
  EXPECT_EQ(PhaseAnnounce::decode(pa.encode()), pa);

  InviteSubmit is{3, 9, r.array<16>(), {}};
  is.invite.bytes = r.array<32>();
  EXPECT_EQ(InviteSubmit::decode(is.encode()), is);

  InviteBroadcast ib{3, 1, {is.invite, is.invite}};
  EXPECT_EQ(InviteBroadcast::decode(ib.encode()), ib);

  SnippetSubmit ss{1, 2, 3, r.array<16>(), 99, r.bytes(80)};
  EXPECT_EQ(SnippetSubmit::decode(ss.encode()), ss);

  MailboxBroadcast mb{1, 2, 0, 5, {{1, r.bytes(32)}, {4, r.bytes(32)}}};
  EXPECT_EQ(MailboxBroadcast::decode(mb.encode()), mb);
  mb.records[1].ciphertext.pop_back();
  EXPECT_EQ(code_of([&] { mb.encode(); }), ErrorCode::WrongSize);

  BucketLists bl{1, 5, 2, {{1, 2, 3}, {}, {4, 5, 6, 7}}};
  EXPECT_EQ(BucketLists::decode(bl.encode()), bl);

  Directory d{1, {{h.identity, 4}}};
  EXPECT_EQ(Directory::decode(d.encode()), d);

  auto frame = make_frame(d);
  EXPECT_EQ(frame.type, MessageType::Directory);
  EXPECT_EQ(parse<Directory>(frame), d);
  EXPECT_EQ(code_of([&] { parse<Hello>(frame); }), ErrorCode::UnknownType);
}

TEST(Messages, TrailingAndTruncatedPayloads) {
  InviteSubmit is{};
  auto bytes = is.encode();
  bytes.push_back(0);
  EXPECT_EQ(code_of([&] { InviteSubmit::decode(bytes); }), ErrorCode::TrailingBytes);
  bytes.resize(10);
  EXPECT_EQ(code_of([&] { InviteSubmit::decode(bytes); }), ErrorCode::Truncated);
  // A count far beyond the payload must not allocate.
  Bytes hostile = from_hex("0000000000000001000000007fffffff");
  EXPECT_EQ(code_of([&] { InviteBroadcast::decode(hostile); }), ErrorCode::Truncated);
}

TEST(Messages, QueryAndAnswerSizesAreFixed) {
  Rng r(5);
  crypto::HeParams p;
  p.n = 64;
  p.pk_rows = 8;
  auto keys = pir::pir_setup(128, 5, r, p);
  QuerySubmit q1{1, 2, r.array<16>(), {}};
  QuerySubmit q2 = q1;
  for (std::uint32_t b = 0; b < 3; ++b) {
    q1.queries.push_back(pir::pir_query(keys, 1, 5, 20, r).second);
    q2.queries.push_back(pir::pir_cover_query(keys, 5, 20, r).second);
  }
  auto e1 = q1.encode(p);
  EXPECT_EQ(e1.size(), q2.encode(p).size());
  auto back = QuerySubmit::decode(e1);
  EXPECT_EQ(back.queries.size(), 3u);
  EXPECT_EQ(back.queries[2].selection, q1.queries[2].selection);
}
