#pragma once

#include <cstdint>

#include "pirates/common/bytes.hpp"

namespace pirates::wire {

inline constexpr std::uint32_t kDefaultBitrateBps = 1600;

// ceil(snippet_ms * bitrate / 8000) bytes.
std::size_t snippet_capacity(std::uint32_t snippet_ms, std::uint32_t bitrate_bps = kDefaultBitrateBps);

// u16be length prefix, raw bytes, zero fill to exactly `capacity` bytes.
// Throws Oversize when raw.size() > capacity - 2.
Bytes pad_snippet(ByteView raw, std::size_t capacity);
// Inverse of pad_snippet; throws Oversize on an inconsistent length prefix.
Bytes unpad_snippet(ByteView padded);

}  // namespace pirates::wire
