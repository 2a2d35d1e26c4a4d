#include "pirates/crypto/lwe.hpp"

#include <cmath>
#include <numbers>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/hash.hpp"

namespace pirates::crypto {

namespace {

std::uint64_t sample_gaussian(Rng& rng, double sigma, std::uint64_t mask) {
  // Box-Muller, rounded to the nearest integer.
  double u1 = rng.unit();
  double u2 = rng.unit();
  if (u1 < 1e-300) u1 = 1e-300;
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  auto e = static_cast<std::int64_t>(std::llround(z * sigma));
  return static_cast<std::uint64_t>(e) & mask;
}

std::uint64_t inner(const std::uint64_t* a, const std::vector<std::uint64_t>& s) {
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += a[k] * s[k];
  return acc;
}

Rng row_stream(const std::array<std::uint8_t, 32>& seed, std::uint32_t row) {
  Writer w(4);
  w.u32(row);
  return Rng(hash({seed, w.bytes()}).bytes);
}

void check_plaintext(const HeParams& p, std::uint64_t m) {
  if (m >= p.plain_modulus()) {
    throw Error(ErrorCode::InvalidArgument, "plaintext " + std::to_string(m) + " out of range");
  }
}

}  // namespace

void HeParams::validate() const {
  if (n == 0 || log_q == 0 || log_q > 64 || plain_bits == 0 || plain_bits >= log_q ||
      sigma <= 0.0 || pk_rows == 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid HE parameters");
  }
}

HeKeyPair he_keygen(const HeParams& params, Rng& rng) {
  params.validate();
  const auto mask = params.q_mask();
  HeKeyPair kp;
  kp.sk.params = params;
  kp.sk.s.resize(params.n);
  for (auto& c : kp.sk.s) {
    switch (rng.uniform(3)) {
      case 0: c = 0; break;
      case 1: c = 1; break;
      default: c = mask; break;  // -1
    }
  }
  kp.pk.params = params;
  kp.pk.seed = rng.array<32>();
  kp.pk.b.resize(params.pk_rows);
  std::vector<std::uint64_t> row(params.n);
  for (std::uint32_t i = 0; i < params.pk_rows; ++i) {
    auto stream = row_stream(kp.pk.seed, i);
    for (auto& c : row) c = stream.next_u64() & mask;
    kp.pk.b[i] = (inner(row.data(), kp.sk.s) + sample_gaussian(rng, params.sigma, mask)) & mask;
  }
  return kp;
}

HeCiphertext he_encrypt(const HeSecretKey& sk, std::uint64_t m, Rng& rng) {
  const auto& p = sk.params;
  check_plaintext(p, m);
  const auto mask = p.q_mask();
  HeCiphertext ct;
  ct.coeffs.resize(p.n + 1);
  for (std::uint32_t k = 0; k < p.n; ++k) ct.coeffs[k] = rng.next_u64() & mask;
  ct.coeffs[p.n] =
      (inner(ct.coeffs.data(), sk.s) + sample_gaussian(rng, p.sigma, mask) + p.delta() * m) & mask;
  return ct;
}

HeCiphertext he_encrypt(const HePublicKey& pk, std::uint64_t m, Rng& rng) {
  const auto& p = pk.params;
  check_plaintext(p, m);
  const auto mask = p.q_mask();
  HeCiphertext ct = he_zero(p);
  std::vector<std::uint64_t> row(p.n);
  std::uint64_t body = 0;
  for (std::uint32_t i = 0; i < p.pk_rows; ++i) {
    if ((rng.next_u64() & 1) == 0) continue;
    auto stream = row_stream(pk.seed, i);
    for (std::uint32_t k = 0; k < p.n; ++k) ct.coeffs[k] += stream.next_u64() & mask;
    body += pk.b[i];
  }
  ct.coeffs[p.n] = body + p.delta() * m;
  he_reduce(p, ct);
  return ct;
}

std::uint64_t he_decrypt(const HeSecretKey& sk, const HeCiphertext& ct) {
  const auto& p = sk.params;
  if (ct.coeffs.size() != p.n + 1) throw Error(ErrorCode::LengthMismatch, "ciphertext dimension");
  const std::uint64_t phase = (ct.coeffs[p.n] - inner(ct.coeffs.data(), sk.s)) & p.q_mask();
  const std::uint32_t shift = p.log_q - p.plain_bits;
  return ((phase + (p.delta() >> 1)) >> shift) & (p.plain_modulus() - 1);
}

std::int64_t he_noise(const HeSecretKey& sk, const HeCiphertext& ct, std::uint64_t expected) {
  const auto& p = sk.params;
  const auto mask = p.q_mask();
  std::uint64_t phase = (ct.coeffs[p.n] - inner(ct.coeffs.data(), sk.s) - p.delta() * expected) & mask;
  const std::uint64_t half = 1ULL << (p.log_q - 1);
  return phase >= half ? -static_cast<std::int64_t>((mask - phase) + 1)
                       : static_cast<std::int64_t>(phase);
}

HeCiphertext he_zero(const HeParams& params) {
  HeCiphertext ct;
  ct.coeffs.assign(params.n + 1, 0);
  return ct;
}

void he_reduce(const HeParams& params, HeCiphertext& ct) {
  const auto mask = params.q_mask();
  for (auto& c : ct.coeffs) c &= mask;
}

HeCiphertext he_add(const HeParams& params, const HeCiphertext& x, const HeCiphertext& y) {
  if (x.coeffs.size() != y.coeffs.size()) throw Error(ErrorCode::LengthMismatch, "he_add");
  HeCiphertext out = x;
  he_accumulate(out, y, 1);
  he_reduce(params, out);
  return out;
}

HeCiphertext he_scale(const HeParams& params, const HeCiphertext& x, std::uint64_t s) {
  HeCiphertext out;
  out.coeffs.assign(x.coeffs.size(), 0);
  he_accumulate(out, x, s);
  he_reduce(params, out);
  return out;
}

std::size_t he_serialized_size(const HeParams& params) {
  return 4 + 1 + static_cast<std::size_t>(params.n + 1) * params.coeff_bytes();
}

void he_serialize(const HeParams& params, const HeCiphertext& ct, Writer& out) {
  const auto width = params.coeff_bytes();
  out.u32(static_cast<std::uint32_t>(ct.dimension()));
  out.u8(static_cast<std::uint8_t>(width));
  Bytes buf(ct.coeffs.size() * width);
  std::size_t pos = 0;
  for (auto c : ct.coeffs) {
    for (std::uint32_t i = 0; i < width; ++i) buf[pos++] = static_cast<std::uint8_t>(c >> (8 * i));
  }
  out.raw(buf);
}

HeCiphertext he_deserialize(Reader& in) {
  const std::uint32_t n = in.u32();
  const std::uint32_t width = in.u8();
  if (width == 0 || width > 8) throw Error(ErrorCode::InvalidArgument, "coefficient width");
  auto body = in.raw(static_cast<std::size_t>(n + 1) * width);
  HeCiphertext ct;
  ct.coeffs.resize(n + 1);
  std::size_t pos = 0;
  for (auto& c : ct.coeffs) {
    std::uint64_t v = 0;
    for (std::uint32_t i = 0; i < width; ++i) v |= std::uint64_t{body[pos++]} << (8 * i);
    c = v;
  }
  return ct;
}

}  // namespace pirates::crypto
