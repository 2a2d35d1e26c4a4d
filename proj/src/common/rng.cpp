#include "pirates/common/rng.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>

#include "pirates/common/errors.hpp"

namespace pirates {

namespace {
constexpr std::size_t kBlock = 4096;
}

struct Rng::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  std::array<std::uint8_t, kBlock> buf{};
  std::size_t pos = kBlock;

  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Rng::Rng(const Seed& seed) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  std::array<std::uint8_t, 16> iv{};
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_chacha20(), nullptr, seed.data(), iv.data()) != 1) {
    throw Error(ErrorCode::InternalFault, "chacha20 init failed");
  }
}

Rng::Rng(std::uint64_t seed) : Rng([seed] {
  Seed s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  return s;
}()) {}

Rng Rng::from_os() {
  Seed s{};
  if (RAND_bytes(s.data(), static_cast<int>(s.size())) != 1) {
    throw Error(ErrorCode::InternalFault, "RAND_bytes failed");
  }
  return Rng(s);
}

Rng::Rng(Rng&&) noexcept = default;
Rng& Rng::operator=(Rng&&) noexcept = default;
Rng::~Rng() = default;

void Rng::refill() {
  static const std::array<std::uint8_t, kBlock> zeros{};
  int len = 0;
  if (EVP_EncryptUpdate(impl_->ctx, impl_->buf.data(), &len, zeros.data(),
                        static_cast<int>(kBlock)) != 1) {
    throw Error(ErrorCode::InternalFault, "chacha20 keystream failed");
  }
  impl_->pos = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (impl_->pos == kBlock) refill();
    std::size_t n = std::min(out.size() - done, kBlock - impl_->pos);
    std::memcpy(out.data() + done, impl_->buf.data() + impl_->pos, n);
    impl_->pos += n;
    done += n;
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::next_u64() {
  if (kBlock - impl_->pos < 8) refill();
  std::uint64_t v;
  std::memcpy(&v, impl_->buf.data() + impl_->pos, 8);
  impl_->pos += 8;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform bound must be nonzero");
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = max() - (max() % bound + 1) % bound;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v <= limit) return v % bound;
  }
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Rng Rng::fork() { return Rng(array<32>()); }

}  // namespace pirates
