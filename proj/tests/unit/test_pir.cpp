#include <gtest/gtest.h>

#include "oracle_vectors.hpp"
#include "pirates/common/errors.hpp"
#include "pirates/pir/pir.hpp"

using namespace pirates;
using namespace pirates::pir;

namespace {

crypto::HeParams small_params() {
  crypto::HeParams p;
  p.n = 256;
  p.pk_rows = 32;
  return p;
}

PirDatabase random_db(std::size_t n, std::size_t size, Rng& r) {
  PirDatabase db(n, size, 10);
  for (std::size_t i = 1; i <= n; ++i) db.send(r.bytes(size), i);
  db.preprocess();
  return db;
}

}  // namespace

TEST(PirLimbs, DecompositionMatchesReference) {
  ByteView item(oracle::kLimbItem, 96);
  auto limbs = decompose(item, 10);
  ASSERT_EQ(limbs.size(), std::size(oracle::kLimbItemLimbs));
  EXPECT_EQ(limbs.size(), 77u);
  for (std::size_t i = 0; i < limbs.size(); ++i) EXPECT_EQ(limbs[i], oracle::kLimbItemLimbs[i]) << i;
  std::vector<std::uint64_t> wide(limbs.begin(), limbs.end());
  EXPECT_EQ(compose(wide, 96, 10), Bytes(item.begin(), item.end()));
  EXPECT_EQ(limb_count(80, 10), 64u);
}

TEST(Pir, RetrievesEveryIndexWithDefaultParams) {
  Rng r(11);
  auto keys = pir_setup(128, 16, r);
  auto db = random_db(16, 96, r);
  for (std::size_t i = 1; i <= 16; ++i) {
    auto [state, query] = pir_query(keys, i, 16, 96, r);
    auto answer = pir_answer(keys.pk, db, query);
    EXPECT_EQ(answer.limbs.size(), 77u);
    auto item = db.item(i);
    EXPECT_EQ(pir_decode(keys.sk, state, answer), Bytes(item.begin(), item.end())) << i;
  }
}

TEST(Pir, PreprocessedAndLazyAnswersAgree) {
  Rng r(12);
  auto keys = pir_setup(128, 8, r, small_params());
  PirDatabase db(8, 40, 10);
  for (std::size_t i = 1; i <= 8; ++i) db.send(r.bytes(40), i);
  auto [state, query] = pir_query(keys, 5, 8, 40, r);
  auto lazy = pir_answer(keys.pk, db, query);
  db.preprocess();
  auto pre = pir_answer(keys.pk, db, query);
  EXPECT_EQ(pir_decode(keys.sk, state, lazy), pir_decode(keys.sk, state, pre));
  EXPECT_EQ(pir_decode(keys.sk, state, pre), Bytes(db.item(5).begin(), db.item(5).end()));
}

TEST(Pir, CoverQueryHasSameShape) {
  Rng r(13);
  auto keys = pir_setup(128, 10, r, small_params());
  auto [s1, q1] = pir_query(keys, 3, 10, 32, r);
  auto [s2, q2] = pir_cover_query(keys, 10, 32, r);
  EXPECT_TRUE(s2.is_cover);
  EXPECT_FALSE(s1.is_cover);
  EXPECT_GE(s2.requested_index, 1u);
  EXPECT_LE(s2.requested_index, 10u);
  Writer w1, w2;
  encode_query(keys.pk.params, q1, w1);
  encode_query(keys.pk.params, q2, w2);
  EXPECT_EQ(w1.size(), w2.size());
  EXPECT_EQ(w1.size(), query_serialized_size(keys.pk.params, 10));
}

TEST(Pir, Errors) {
  Rng r(14);
  auto keys = pir_setup(128, 4, r, small_params());
  PirDatabase db(4, 16, 10);
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InternalFault;
  };
  EXPECT_EQ(code_of([&] { db.send(Bytes(16), 0); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { db.send(Bytes(16), 5); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { db.send(Bytes(15), 1); }), ErrorCode::WrongItemSize);
  EXPECT_EQ(code_of([&] { pir_query(keys, 5, 4, 16, r); }), ErrorCode::IndexOutOfRange);
  auto [state, query] = pir_query(keys, 2, 3, 16, r);
  EXPECT_EQ(code_of([&] { pir_answer(keys.pk, db, query); }), ErrorCode::LengthMismatch);
}

TEST(Pir, AnswerEncodingRoundTrip) {
  Rng r(15);
  auto keys = pir_setup(128, 6, r, small_params());
  auto db = random_db(6, 24, r);
  auto [state, query] = pir_query(keys, 6, 6, 24, r);
  query.client_tag = 9;
  query.bucket_index = 2;
  auto answer = pir_answer(keys.pk, db, query);
  Writer w;
  encode_answer(keys.pk.params, answer, w);
  EXPECT_EQ(w.size(), answer_serialized_size(keys.pk.params, 24));
  Reader rd(w.bytes());
  auto back = decode_answer(rd);
  EXPECT_EQ(back.client_tag, 9u);
  EXPECT_EQ(back.bucket_index, 2u);
  EXPECT_EQ(pir_decode(keys.sk, state, back), Bytes(db.item(6).begin(), db.item(6).end()));
}
