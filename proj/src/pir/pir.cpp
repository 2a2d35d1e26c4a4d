#include "pirates/pir/pir.hpp"

#include <algorithm>

#include "pirates/common/errors.hpp"

namespace pirates::pir {

using crypto::HeCiphertext;

PirKeys pir_setup(std::uint32_t security_param, std::size_t max_items, Rng& rng,
                  const crypto::HeParams& params) {
  if (max_items == 0) throw Error(ErrorCode::InvalidArgument, "max_items must be >= 1");
  auto kp = crypto::he_keygen(params, rng);
  return PirKeys{std::move(kp.pk), std::move(kp.sk), max_items, security_param};
}

std::size_t limb_count(std::size_t item_size, std::uint32_t limb_bits) {
  return (item_size * 8 + limb_bits - 1) / limb_bits;
}

std::vector<std::uint32_t> decompose(ByteView item, std::uint32_t limb_bits) {
  std::vector<std::uint32_t> out(limb_count(item.size(), limb_bits), 0);
  const std::size_t total_bits = item.size() * 8;
  for (std::size_t bit = 0; bit < total_bits; ++bit) {
    if ((item[bit / 8] >> (bit % 8)) & 1) out[bit / limb_bits] |= 1u << (bit % limb_bits);
  }
  return out;
}

Bytes compose(std::span<const std::uint64_t> limbs, std::size_t item_size, std::uint32_t limb_bits) {
  Bytes out(item_size, 0);
  const std::size_t total_bits = item_size * 8;
  for (std::size_t bit = 0; bit < total_bits; ++bit) {
    std::size_t limb = bit / limb_bits;
    if (limb < limbs.size() && ((limbs[limb] >> (bit % limb_bits)) & 1)) {
      out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

PirDatabase::PirDatabase(std::size_t n_items, std::size_t item_size, std::uint32_t limb_bits)
    : n_items_(n_items),
      item_size_(item_size),
      limb_bits_(limb_bits),
      limb_count_(pir::limb_count(item_size, limb_bits)),
      items_(n_items * item_size, 0) {
  if (limb_bits == 0 || limb_bits > 16) throw Error(ErrorCode::InvalidArgument, "limb width");
}

void PirDatabase::send(ByteView item, std::size_t index) {
  if (index < 1 || index > n_items_) {
    throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(index) + " of " +
                                                std::to_string(n_items_));
  }
  if (item.size() != item_size_) {
    throw Error(ErrorCode::WrongItemSize, std::to_string(item.size()) + " != " +
                                              std::to_string(item_size_));
  }
  std::copy(item.begin(), item.end(), items_.begin() + static_cast<std::ptrdiff_t>((index - 1) * item_size_));
  dirty_ = true;
}

ByteView PirDatabase::item(std::size_t index) const {
  if (index < 1 || index > n_items_) throw Error(ErrorCode::IndexOutOfRange, "item index");
  return ByteView(items_).subspan((index - 1) * item_size_, item_size_);
}

void PirDatabase::preprocess() {
  limbs_.assign(n_items_ * limb_count_, 0);
  for (std::size_t j = 0; j < n_items_; ++j) {
    auto parts = decompose(item(j + 1), limb_bits_);
    std::copy(parts.begin(), parts.end(), limbs_.begin() + static_cast<std::ptrdiff_t>(j * limb_count_));
  }
  dirty_ = false;
}

std::pair<PirState, PirQuery> pir_query(const PirKeys& keys, std::size_t index, std::size_t n_items,
                                        std::size_t item_size, Rng& rng) {
  if (n_items == 0 || n_items > keys.max_items || index < 1 || index > n_items) {
    throw Error(ErrorCode::IndexOutOfRange, "query index " + std::to_string(index) + " of " +
                                                std::to_string(n_items));
  }
  PirQuery q;
  q.selection.reserve(n_items);
  for (std::size_t j = 1; j <= n_items; ++j) {
    q.selection.push_back(crypto::he_encrypt(keys.sk, j == index ? 1 : 0, rng));
  }
  return {PirState{index, false, item_size}, std::move(q)};
}

std::pair<PirState, PirQuery> pir_cover_query(const PirKeys& keys, std::size_t n_items,
                                              std::size_t item_size, Rng& rng) {
  if (n_items == 0) throw Error(ErrorCode::IndexOutOfRange, "empty bucket");
  auto index = static_cast<std::size_t>(rng.uniform(n_items)) + 1;
  auto out = pir_query(keys, index, n_items, item_size, rng);
  out.first.is_cover = true;
  return out;
}

PirAnswer pir_answer(const crypto::HePublicKey& pk, const PirDatabase& db, const PirQuery& query) {
  if (query.selection.size() != db.size()) {
    throw Error(ErrorCode::LengthMismatch, "query length " + std::to_string(query.selection.size()) +
                                               " != " + std::to_string(db.size()));
  }
  const auto& params = pk.params;
  if (db.limb_bits() != params.plain_bits) {
    throw Error(ErrorCode::InvalidArgument, "database limb width differs from plaintext width");
  }
  const std::size_t n_limbs = db.limb_count();
  std::vector<std::uint16_t> local;
  const std::vector<std::uint16_t>* table = &db.limb_table();
  if (!db.preprocessed()) {
    local.reserve(db.size() * n_limbs);
    for (std::size_t j = 1; j <= db.size(); ++j) {
      for (auto l : decompose(db.item(j), db.limb_bits())) local.push_back(static_cast<std::uint16_t>(l));
    }
    table = &local;
  }
  PirAnswer out;
  out.client_tag = query.client_tag;
  out.bucket_index = query.bucket_index;
  out.limbs.assign(n_limbs, crypto::he_zero(params));
  for (std::size_t j = 0; j < db.size(); ++j) {
    const HeCiphertext& v = query.selection[j];
    if (v.coeffs.size() != params.n + 1) throw Error(ErrorCode::LengthMismatch, "ciphertext dimension");
    const std::uint16_t* row = table->data() + j * n_limbs;
    for (std::size_t l = 0; l < n_limbs; ++l) {
      if (row[l] != 0) crypto::he_accumulate(out.limbs[l], v, row[l]);
    }
  }
  for (auto& limb : out.limbs) crypto::he_reduce(params, limb);
  return out;
}

Bytes pir_decode(const crypto::HeSecretKey& sk, const PirState& state, const PirAnswer& answer) {
  std::vector<std::uint64_t> limbs;
  limbs.reserve(answer.limbs.size());
  for (const auto& ct : answer.limbs) limbs.push_back(crypto::he_decrypt(sk, ct));
  if (limbs.size() != limb_count(state.item_size, sk.params.plain_bits)) {
    throw Error(ErrorCode::LengthMismatch, "answer limb count");
  }
  return compose(limbs, state.item_size, sk.params.plain_bits);
}

void encode_query(const crypto::HeParams& params, const PirQuery& q, Writer& out) {
  out.u32(q.client_tag);
  out.u32(q.bucket_index);
  out.u32(static_cast<std::uint32_t>(q.selection.size()));
  for (const auto& ct : q.selection) crypto::he_serialize(params, ct, out);
}

PirQuery decode_query(Reader& in) {
  PirQuery q;
  q.client_tag = in.u32();
  q.bucket_index = in.u32();
  const auto n = in.u32();
  q.selection.reserve(std::min<std::size_t>(n, in.remaining()));
  for (std::uint32_t i = 0; i < n; ++i) q.selection.push_back(crypto::he_deserialize(in));
  return q;
}

void encode_answer(const crypto::HeParams& params, const PirAnswer& a, Writer& out) {
  out.u32(a.client_tag);
  out.u32(a.bucket_index);
  out.u32(static_cast<std::uint32_t>(a.limbs.size()));
  for (const auto& ct : a.limbs) crypto::he_serialize(params, ct, out);
}

PirAnswer decode_answer(Reader& in) {
  PirAnswer a;
  a.client_tag = in.u32();
  a.bucket_index = in.u32();
  const auto n = in.u32();
  a.limbs.reserve(std::min<std::size_t>(n, in.remaining()));
  for (std::uint32_t i = 0; i < n; ++i) a.limbs.push_back(crypto::he_deserialize(in));
  return a;
}

std::size_t query_serialized_size(const crypto::HeParams& params, std::size_t n_items) {
  return 12 + n_items * crypto::he_serialized_size(params);
}

std::size_t answer_serialized_size(const crypto::HeParams& params, std::size_t item_size) {
  return 12 + limb_count(item_size, params.plain_bits) * crypto::he_serialized_size(params);
}

}  // namespace pirates::pir
