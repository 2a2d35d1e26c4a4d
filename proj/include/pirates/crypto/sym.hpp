#pragma once

#include <array>
#include <cstdint>

#include "pirates/common/bytes.hpp"

namespace pirates::crypto {

struct GroupMasterKey {
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const GroupMasterKey&) const = default;
};

using Iv = std::array<std::uint8_t, 16>;

// AES-128-CBC over a fixed-length padded block. Every ciphertext produced by
// one cipher instance has the same length regardless of the plaintext.
//
// Padded layout: u16 big-endian plaintext length, plaintext, then zero fill
// up to round_up(capacity + 2, 16) + 16 bytes. The final all-zero block
// doubles as a redundancy check, so decrypting under the wrong key or IV (or
// decrypting random bytes) is rejected with MalformedPadding except with
// probability about 2^-128.
class SymCipher {
 public:
  explicit SymCipher(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t ciphertext_size() const { return padded_size_; }

  // Throws OversizePlaintext when plaintext.size() > capacity().
  Bytes encrypt(const GroupMasterKey& key, const Iv& iv, ByteView plaintext) const;
  // Throws MalformedPadding when the padding check fails ("not for me") and
  // WrongSize when ct has the wrong length.
  Bytes decrypt(const GroupMasterKey& key, const Iv& iv, ByteView ct) const;

 private:
  std::size_t capacity_;
  std::size_t padded_size_;
};

// Per-round IV: first 16 bytes of hash(epoch_iv || u64be(round)).
Iv round_iv(const Iv& epoch_iv, std::uint64_t round);

}  // namespace pirates::crypto
