#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <cstring>
#include <initializer_list>

#include "pirates/common/bytes.hpp"

namespace pirates::crypto {

inline constexpr std::size_t kDigestSize = 32;

// SHA3-256 output. Ordering compares digests as big-endian unsigned integers.
struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  auto operator<=>(const Digest&) const = default;
  ByteView view() const { return bytes; }
  std::string hex() const { return to_hex(bytes); }
};

Digest hash(ByteView data);
// Hash of the concatenation of all parts, without materializing it.
Digest hash(std::initializer_list<ByteView> parts);

struct DigestHasher {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h;
    static_assert(sizeof(h) <= kDigestSize);
    std::memcpy(&h, d.bytes.data(), sizeof(h));
    return h;
  }
};

}  // namespace pirates::crypto
