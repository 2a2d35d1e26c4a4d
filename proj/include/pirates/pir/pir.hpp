#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pirates/common/bytes.hpp"
#include "pirates/common/rng.hpp"
#include "pirates/crypto/lwe.hpp"

namespace pirates::pir {

// Computational PIR over the additive LWE scheme: a query is a vector of
// encryptions of the selection bits, an answer is the selection-weighted sum
// of the database limbs. Indices are 1-based.

struct PirKeys {
  crypto::HePublicKey pk;
  crypto::HeSecretKey sk;
  std::size_t max_items = 0;
  std::uint32_t security_param = 0;
};

// security_param is recorded only; the lattice parameters come from `params`.
PirKeys pir_setup(std::uint32_t security_param, std::size_t max_items, Rng& rng,
                  const crypto::HeParams& params = {});

std::size_t limb_count(std::size_t item_size, std::uint32_t limb_bits);
// Splits an item into limb_bits-wide little-endian limbs; the last limb is
// zero-extended.
std::vector<std::uint32_t> decompose(ByteView item, std::uint32_t limb_bits);
Bytes compose(std::span<const std::uint64_t> limbs, std::size_t item_size, std::uint32_t limb_bits);

class PirDatabase {
 public:
  PirDatabase(std::size_t n_items, std::size_t item_size, std::uint32_t limb_bits);

  std::size_t size() const { return n_items_; }
  std::size_t item_size() const { return item_size_; }
  std::uint32_t limb_bits() const { return limb_bits_; }
  std::size_t limb_count() const { return limb_count_; }

  // Replaces item `index` (1-based). Throws IndexOutOfRange / WrongItemSize.
  void send(ByteView item, std::size_t index);
  ByteView item(std::size_t index) const;

  // Recomputes the limb table after writes. Answers computed concurrently
  // must share a preprocessed database.
  void preprocess();
  bool preprocessed() const { return !dirty_; }
  // Row-major [item][limb]; valid only when preprocessed().
  const std::vector<std::uint16_t>& limb_table() const { return limbs_; }

 private:
  std::size_t n_items_;
  std::size_t item_size_;
  std::uint32_t limb_bits_;
  std::size_t limb_count_;
  Bytes items_;
  std::vector<std::uint16_t> limbs_;
  bool dirty_ = true;
};

// Client-local; never leaves the client.
struct PirState {
  std::size_t requested_index = 0;
  bool is_cover = false;
  std::size_t item_size = 0;
};

struct PirQuery {
  std::vector<crypto::HeCiphertext> selection;
  std::uint32_t client_tag = 0;
  std::uint32_t bucket_index = 0;
};

struct PirAnswer {
  std::vector<crypto::HeCiphertext> limbs;
  std::uint32_t client_tag = 0;
  std::uint32_t bucket_index = 0;
};

std::pair<PirState, PirQuery> pir_query(const PirKeys& keys, std::size_t index, std::size_t n_items,
                                        std::size_t item_size, Rng& rng);
// Query for a uniformly random index, generated through the same path as a
// real query.
std::pair<PirState, PirQuery> pir_cover_query(const PirKeys& keys, std::size_t n_items,
                                              std::size_t item_size, Rng& rng);

// Throws LengthMismatch when the query length differs from the database size.
PirAnswer pir_answer(const crypto::HePublicKey& pk, const PirDatabase& db, const PirQuery& query);

Bytes pir_decode(const crypto::HeSecretKey& sk, const PirState& state, const PirAnswer& answer);

// Wire encodings. Sizes depend only on (params, n_items) and
// (params, item_size) respectively.
void encode_query(const crypto::HeParams& params, const PirQuery& q, Writer& out);
PirQuery decode_query(Reader& in);
void encode_answer(const crypto::HeParams& params, const PirAnswer& a, Writer& out);
PirAnswer decode_answer(Reader& in);
std::size_t query_serialized_size(const crypto::HeParams& params, std::size_t n_items);
std::size_t answer_serialized_size(const crypto::HeParams& params, std::size_t item_size);

}  // namespace pirates::pir
