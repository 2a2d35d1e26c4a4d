#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pirates/common/bytes.hpp"
#include "pirates/common/rng.hpp"

namespace pirates::crypto {

// Parameters of the additively homomorphic LWE scheme. Arithmetic is modulo
// q = 2^log_q on native 64-bit words; plaintexts live in [0, 2^plain_bits).
// The defaults are sized for noise safety at the bucket sizes used in this
// project, not for a particular security level.
struct HeParams {
  std::uint32_t n = 1024;
  std::uint32_t log_q = 56;
  std::uint32_t plain_bits = 10;
  double sigma = 3.2;
  // Rows of the public matrix used for public-key encryption.
  std::uint32_t pk_rows = 1024;

  std::uint64_t q_mask() const { return log_q == 64 ? ~0ULL : (1ULL << log_q) - 1; }
  std::uint64_t plain_modulus() const { return 1ULL << plain_bits; }
  std::uint64_t delta() const { return 1ULL << (log_q - plain_bits); }
  std::uint32_t coeff_bytes() const { return (log_q + 7) / 8; }
  // Validates the invariants the implementation relies on.
  void validate() const;

  bool operator==(const HeParams&) const = default;
};

// (a_1..a_n, b) with b = <a, s> + e + delta * m (mod q).
struct HeCiphertext {
  std::vector<std::uint64_t> coeffs;

  std::size_t dimension() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  bool operator==(const HeCiphertext&) const = default;
};

struct HeSecretKey {
  HeParams params;
  std::vector<std::uint64_t> s;  // ternary, stored mod q
};

// Public matrix A is expanded from `seed`; only b = A s + e is stored.
struct HePublicKey {
  HeParams params;
  std::array<std::uint8_t, 32> seed{};
  std::vector<std::uint64_t> b;
};

struct HeKeyPair {
  HePublicKey pk;
  HeSecretKey sk;
};

HeKeyPair he_keygen(const HeParams& params, Rng& rng);

HeCiphertext he_encrypt(const HeSecretKey& sk, std::uint64_t m, Rng& rng);
HeCiphertext he_encrypt(const HePublicKey& pk, std::uint64_t m, Rng& rng);
std::uint64_t he_decrypt(const HeSecretKey& sk, const HeCiphertext& ct);

HeCiphertext he_add(const HeParams& params, const HeCiphertext& x, const HeCiphertext& y);
HeCiphertext he_scale(const HeParams& params, const HeCiphertext& x, std::uint64_t s);

// acc += s * x without reduction. Since q divides 2^64, wrapping arithmetic
// stays correct; call he_reduce once after a run of accumulations.
inline void he_accumulate(HeCiphertext& acc, const HeCiphertext& x, std::uint64_t s) {
  auto* out = acc.coeffs.data();
  const auto* in = x.coeffs.data();
  const std::size_t len = acc.coeffs.size();
  for (std::size_t k = 0; k < len; ++k) out[k] += s * in[k];
}
void he_reduce(const HeParams& params, HeCiphertext& ct);
HeCiphertext he_zero(const HeParams& params);

// Centered decryption noise relative to `expected`. Test helper.
std::int64_t he_noise(const HeSecretKey& sk, const HeCiphertext& ct, std::uint64_t expected);

// u32 n, u8 coefficient width w, then n+1 little-endian w-byte coefficients.
std::size_t he_serialized_size(const HeParams& params);
void he_serialize(const HeParams& params, const HeCiphertext& ct, Writer& out);
HeCiphertext he_deserialize(Reader& in);

}  // namespace pirates::crypto
