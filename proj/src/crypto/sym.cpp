#include "pirates/crypto/sym.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/hash.hpp"

namespace pirates::crypto {

namespace {

constexpr std::size_t kBlock = 16;
constexpr std::string_view kKeyLabel = "pirates/snippet-key/v1";

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

std::array<std::uint8_t, 16> derive_aes_key(const GroupMasterKey& key) {
  auto d = hash({key.bytes, as_bytes(kKeyLabel)});
  std::array<std::uint8_t, 16> out{};
  std::copy_n(d.bytes.begin(), out.size(), out.begin());
  return out;
}

Bytes cbc(bool encrypt, const GroupMasterKey& key, const Iv& iv, ByteView in) {
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  auto aes_key = derive_aes_key(key);
  if (!ctx || EVP_CipherInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, aes_key.data(), iv.data(),
                                encrypt ? 1 : 0) != 1) {
    throw Error(ErrorCode::InternalFault, "aes init failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  Bytes out(in.size() + kBlock);
  int len = 0;
  int fin = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
      EVP_CipherFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw Error(ErrorCode::InternalFault, "aes cbc failed");
  }
  out.resize(static_cast<std::size_t>(len + fin));
  return out;
}

}  // namespace

SymCipher::SymCipher(std::size_t capacity)
    : capacity_(capacity),
      padded_size_((capacity + 2 + kBlock - 1) / kBlock * kBlock + kBlock) {
  if (capacity > 0xffff) throw Error(ErrorCode::InvalidArgument, "capacity exceeds 65535 bytes");
}

Bytes SymCipher::encrypt(const GroupMasterKey& key, const Iv& iv, ByteView plaintext) const {
  if (plaintext.size() > capacity_) {
    throw Error(ErrorCode::OversizePlaintext, std::to_string(plaintext.size()) + " > " +
                                                  std::to_string(capacity_));
  }
  Bytes padded(padded_size_, 0);
  padded[0] = static_cast<std::uint8_t>(plaintext.size() >> 8);
  padded[1] = static_cast<std::uint8_t>(plaintext.size());
  std::copy(plaintext.begin(), plaintext.end(), padded.begin() + 2);
  return cbc(true, key, iv, padded);
}

Bytes SymCipher::decrypt(const GroupMasterKey& key, const Iv& iv, ByteView ct) const {
  if (ct.size() != padded_size_) {
    throw Error(ErrorCode::WrongSize, "ciphertext length " + std::to_string(ct.size()));
  }
  Bytes padded = cbc(false, key, iv, ct);
  std::size_t len = (std::size_t{padded[0]} << 8) | padded[1];
  if (len > capacity_ ||
      !std::all_of(padded.begin() + 2 + static_cast<std::ptrdiff_t>(len), padded.end(),
                   [](std::uint8_t b) { return b == 0; })) {
    throw Error(ErrorCode::MalformedPadding, "padding check failed");
  }
  return Bytes(padded.begin() + 2, padded.begin() + 2 + static_cast<std::ptrdiff_t>(len));
}

Iv round_iv(const Iv& epoch_iv, std::uint64_t round) {
  Writer w(8);
  w.u64(round);
  auto d = hash({epoch_iv, w.bytes()});
  Iv out{};
  std::copy_n(d.bytes.begin(), out.size(), out.begin());
  return out;
}

}  // namespace pirates::crypto
