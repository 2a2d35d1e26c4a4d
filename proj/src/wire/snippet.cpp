#include "pirates/wire/snippet.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::wire {

std::size_t snippet_capacity(std::uint32_t snippet_ms, std::uint32_t bitrate_bps) {
  const std::uint64_t bits = std::uint64_t{snippet_ms} * bitrate_bps;
  return static_cast<std::size_t>((bits + 7999) / 8000);
}

Bytes pad_snippet(ByteView raw, std::size_t capacity) {
  if (capacity < 2 || raw.size() > capacity - 2) {
    throw Error(ErrorCode::Oversize, std::to_string(raw.size()) + " bytes into capacity " +
                                         std::to_string(capacity));
  }
  Bytes out(capacity, 0);
  out[0] = static_cast<std::uint8_t>(raw.size() >> 8);
  out[1] = static_cast<std::uint8_t>(raw.size());
  std::copy(raw.begin(), raw.end(), out.begin() + 2);
  return out;
}

Bytes unpad_snippet(ByteView padded) {
  if (padded.size() < 2) throw Error(ErrorCode::Truncated, "snippet shorter than its prefix");
  const std::size_t len = (std::size_t{padded[0]} << 8) | padded[1];
  if (len > padded.size() - 2) throw Error(ErrorCode::Oversize, "length prefix exceeds snippet");
  return Bytes(padded.begin() + 2, padded.begin() + 2 + static_cast<std::ptrdiff_t>(len));
}

}  // namespace pirates::wire
