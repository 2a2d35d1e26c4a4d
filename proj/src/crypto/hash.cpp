#include "pirates/crypto/hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "pirates/common/errors.hpp"

namespace pirates::crypto {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

// One context per thread; EVP_DigestInit_ex resets it.
EVP_MD_CTX* thread_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  return ctx.get();
}

}  // namespace

Digest hash(std::initializer_list<ByteView> parts) {
  EVP_MD_CTX* ctx = thread_ctx();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha3_256(), nullptr) != 1) {
    throw Error(ErrorCode::InternalFault, "sha3 init failed");
  }
  for (const auto& part : parts) {
    if (!part.empty() && EVP_DigestUpdate(ctx, part.data(), part.size()) != 1) {
      throw Error(ErrorCode::InternalFault, "sha3 update failed");
    }
  }
  Digest out;
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, out.bytes.data(), &len) != 1 || len != kDigestSize) {
    throw Error(ErrorCode::InternalFault, "sha3 final failed");
  }
  return out;
}

Digest hash(ByteView data) { return hash({data}); }

}  // namespace pirates::crypto
