#include "pirates/wire/frame.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::wire {

bool is_registered_type(std::uint8_t value) { return value >= 1 && value <= 11; }

const char* to_string(MessageType type) {
  switch (type) {
    case MessageType::Hello: return "HELLO";
    case MessageType::RegInfo: return "REG_INFO";
    case MessageType::PhaseAnnounce: return "PHASE_ANNOUNCE";
    case MessageType::InviteSubmit: return "INVITE_SUBMIT";
    case MessageType::InviteBroadcast: return "INVITE_BROADCAST";
    case MessageType::QuerySubmit: return "QUERY_SUBMIT";
    case MessageType::SnippetSubmit: return "SNIPPET_SUBMIT";
    case MessageType::MailboxBroadcast: return "MAILBOX_BROADCAST";
    case MessageType::AnswerSet: return "ANSWER_SET";
    case MessageType::BucketLists: return "BUCKET_LISTS";
    case MessageType::Directory: return "DIRECTORY";
  }
  return "UNKNOWN";
}

Bytes encode_frame(MessageType type, ByteView payload, std::size_t max_payload) {
  if (payload.size() > max_payload || payload.size() > 0xffffffffULL) {
    throw Error(ErrorCode::OversizeFrame, "payload of " + std::to_string(payload.size()) + " bytes");
  }
  Writer w(kFrameHeaderSize + payload.size());
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u8(static_cast<std::uint8_t>(type));
  w.raw(payload);
  return std::move(w).take();
}

Frame decode_frame(ByteView stream, std::size_t& consumed, std::size_t max_payload) {
  if (stream.size() < kFrameHeaderSize) throw Error(ErrorCode::Truncated, "frame header");
  Reader r(stream);
  const std::uint32_t length = r.u32();
  const std::uint8_t type = r.u8();
  if (!is_registered_type(type)) throw Error(ErrorCode::UnknownType, "type " + std::to_string(type));
  if (length > max_payload) throw Error(ErrorCode::OversizeFrame, "length " + std::to_string(length));
  if (r.remaining() < length) throw Error(ErrorCode::Truncated, "frame payload");
  auto payload = r.raw(length);
  consumed = kFrameHeaderSize + length;
  return Frame{static_cast<MessageType>(type), Bytes(payload.begin(), payload.end())};
}

void FrameDecoder::feed(ByteView data) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), data.begin(), data.end());
}

std::optional<Frame> FrameDecoder::next() {
  ByteView pending = ByteView(buf_).subspan(pos_);
  if (pending.size() < kFrameHeaderSize) return std::nullopt;
  Reader r(pending);
  const std::uint32_t length = r.u32();
  const std::uint8_t type = r.u8();
  if (!is_registered_type(type)) throw Error(ErrorCode::UnknownType, "type " + std::to_string(type));
  if (length > max_payload_) throw Error(ErrorCode::OversizeFrame, "length " + std::to_string(length));
  if (pending.size() < kFrameHeaderSize + length) return std::nullopt;
  std::size_t consumed = 0;
  Frame f = decode_frame(pending, consumed, max_payload_);
  pos_ += consumed;
  // Compact once the consumed prefix dominates the buffer.
  if (pos_ > (std::size_t{1} << 20) && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  return f;
}

}  // namespace pirates::wire
