#include "pirates/dialing/gaddra.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <memory>

#include "pirates/common/errors.hpp"

namespace pirates::dialing {

namespace {

constexpr std::array<std::uint8_t, 5> kHello = {'h', 'e', 'l', 'l', 'o'};

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

}  // namespace

GaddraInvite gaddra_make_invite(const crypto::GroupMasterKey& gmk, Rng& rng) {
  GaddraInvite out;
  auto iv = rng.array<16>();
  std::copy(iv.begin(), iv.end(), out.bytes.begin());
  CtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  int fin = 0;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, gmk.bytes.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.bytes.data() + 16, &len, kHello.data(),
                        static_cast<int>(kHello.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.bytes.data() + 16 + len, &fin) != 1 || len + fin != 16) {
    throw Error(ErrorCode::InternalFault, "gaddra encrypt failed");
  }
  return out;
}

std::vector<std::size_t> gaddra_process(std::span<const GaddraInvite> received,
                                        std::span<const GroupDescriptor> my_groups) {
  std::vector<std::size_t> detected;
  CtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error(ErrorCode::InternalFault, "cipher ctx");
  std::array<std::uint8_t, 32> plain{};
  for (std::size_t g = 0; g < my_groups.size(); ++g) {
    const auto& key = my_groups[g].gmk.bytes;
    bool hit = false;
    for (const auto& inv : received) {
      int len = 0;
      int fin = 0;
      if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr, key.data(), inv.bytes.data()) != 1 ||
          EVP_DecryptUpdate(ctx.get(), plain.data(), &len, inv.bytes.data() + 16, 16) != 1) {
        throw Error(ErrorCode::InternalFault, "gaddra decrypt failed");
      }
      // A bad PKCS#7 pad is the common "not for me" outcome.
      if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &fin) != 1) continue;
      if (len + fin == static_cast<int>(kHello.size()) &&
          std::memcmp(plain.data(), kHello.data(), kHello.size()) == 0) {
        hit = true;
      }
    }
    if (hit) detected.push_back(g);
  }
  return detected;
}

}  // namespace pirates::dialing
