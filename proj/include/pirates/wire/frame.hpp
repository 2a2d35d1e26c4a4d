#pragma once

#include <cstdint>
#include <optional>

#include "pirates/common/bytes.hpp"

namespace pirates::wire {

// Frame layout: u32be payload length | u8 message type | payload.
inline constexpr std::size_t kFrameHeaderSize = 5;
inline constexpr std::size_t kDefaultMaxPayload = std::size_t{256} << 20;

enum class MessageType : std::uint8_t {
  Hello = 1,
  RegInfo = 2,
  PhaseAnnounce = 3,
  InviteSubmit = 4,
  InviteBroadcast = 5,
  QuerySubmit = 6,
  SnippetSubmit = 7,
  MailboxBroadcast = 8,
  AnswerSet = 9,
  BucketLists = 10,
  Directory = 11,
};

bool is_registered_type(std::uint8_t value);
const char* to_string(MessageType type);

struct Frame {
  MessageType type = MessageType::Hello;
  Bytes payload;

  std::size_t wire_size() const { return kFrameHeaderSize + payload.size(); }
  bool operator==(const Frame&) const = default;
};

// Throws OversizeFrame when the payload exceeds max_payload.
Bytes encode_frame(MessageType type, ByteView payload, std::size_t max_payload = kDefaultMaxPayload);
inline Bytes encode_frame(const Frame& f) { return encode_frame(f.type, f.payload); }

// Decodes one frame from the front of `stream` and reports the bytes
// consumed (payload length + 5). Throws Truncated, UnknownType or
// OversizeFrame.
Frame decode_frame(ByteView stream, std::size_t& consumed,
                   std::size_t max_payload = kDefaultMaxPayload);

// Incremental decoder for one byte stream. Not shared between connections.
class FrameDecoder {
 public:
  explicit FrameDecoder(std::size_t max_payload = kDefaultMaxPayload) : max_payload_(max_payload) {}

  void feed(ByteView data);
  // Next complete frame, or nullopt if more bytes are needed. Throws on a
  // malformed header.
  std::optional<Frame> next();
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::size_t max_payload_;
  Bytes buf_;
  std::size_t pos_ = 0;
};

}  // namespace pirates::wire
