#include "pirates/nodes/worker.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/sym.hpp"
#include "pirates/wire/snippet.hpp"

namespace pirates::nodes {

using wire::MessageType;
using wire::PhaseCode;

namespace {

std::int64_t steady_us() { return SteadyClock().now_us(); }

// Runs fn(i) for i in [0, n) on up to `threads` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

Worker::Worker(WorkerConfig config, const Clock& clock, Recorder& recorder, std::uint32_t pending_tag)
    : cfg_(std::move(config)),
      clock_(clock),
      rec_(recorder),
      rng_(cfg_.seed ? Rng(*cfg_.seed) : Rng::from_os()),
      self_(PeerId::pending(Role::Worker, pending_tag)) {}

void Worker::start(Outbox& out) {
  out.connect(PeerId::coordinator(), cfg_.coordinator);
  wire::Hello hello;
  hello.role = Role::Worker;
  hello.listen = cfg_.listen;
  out.send(PeerId::coordinator(), wire::make_frame(hello));
}

void Worker::add_client(std::uint32_t tag, const wire::Token& token) { clients_[tag] = token; }

void Worker::begin_epoch(const wire::PhaseAnnounce& a, std::vector<std::vector<std::uint32_t>> lists) {
  if (lists.size() != a.n_buckets) throw Error(ErrorCode::InvalidArgument, "bucket list count");
  epoch_info_ = a;
  lists_ = std::move(lists);
  record_size_ = crypto::SymCipher(wire::snippet_capacity(a.schedule.snippet_ms, a.schedule.bitrate_bps))
                     .ciphertext_size();
  queries_.clear();
  broadcasts_.clear();
  round_ = 0;
  stage_ = Stage::Dialing;
  timer_ = clock_.now_us() + std::int64_t{a.schedule.dial_ms} * 2000;
}

void Worker::store_queries(std::uint32_t tag, const wire::Token& token, std::vector<pir::PirQuery> queries) {
  auto it = clients_.find(tag);
  if (it == clients_.end()) throw Error(ErrorCode::UnknownClient, "client " + std::to_string(tag));
  if (it->second != token) throw Error(ErrorCode::BadToken, "client " + std::to_string(tag));
  if (queries.size() != lists_.size()) {
    throw Error(ErrorCode::WrongQueryCount,
                std::to_string(queries.size()) + " queries for " + std::to_string(lists_.size()) + " buckets");
  }
  for (std::size_t b = 0; b < queries.size(); ++b) {
    const std::size_t expect = std::max<std::size_t>(1, lists_[b].size());
    if (queries[b].selection.size() != expect) {
      throw Error(ErrorCode::LengthMismatch, "bucket " + std::to_string(b + 1));
    }
    queries[b].client_tag = tag;
    queries[b].bucket_index = static_cast<std::uint32_t>(b + 1);
  }
  queries_[tag] = std::move(queries);
}

std::vector<wire::AnswerSet> Worker::answer_round(std::uint32_t round,
                                                  const std::map<std::uint32_t, Bytes>& contents,
                                                  unsigned threads, RoundTiming* timing) {
  if (!epoch_info_) throw Error(ErrorCode::PhaseMissed, "no epoch");
  const auto& he = epoch_info_->he;
  const auto t0 = steady_us();
  std::vector<pir::PirDatabase> dbs;
  dbs.reserve(lists_.size());
  for (const auto& list : lists_) {
    pir::PirDatabase db(std::max<std::size_t>(1, list.size()), record_size_, he.plain_bits);
    for (std::size_t j = 0; j < list.size(); ++j) {
      auto it = contents.find(list[j]);
      if (it != contents.end() && it->second.size() == record_size_) {
        db.send(it->second, j + 1);
      } else {
        db.send(rng_.bytes(record_size_), j + 1);
      }
    }
    if (list.empty()) db.send(rng_.bytes(record_size_), 1);
    dbs.push_back(std::move(db));
  }
  parallel_for(dbs.size(), threads, [&](std::size_t b) { dbs[b].preprocess(); });
  const auto t1 = steady_us();

  std::vector<std::pair<std::uint32_t, const std::vector<pir::PirQuery>*>> work;
  for (const auto& [tag, qs] : queries_) work.emplace_back(tag, &qs);
  const std::size_t n_buckets = lists_.size();
  std::vector<wire::AnswerSet> sets(work.size());
  crypto::HePublicKey pk;
  pk.params = he;
  for (std::size_t c = 0; c < work.size(); ++c) {
    sets[c].epoch = epoch_info_->epoch;
    sets[c].round = round;
    sets[c].client_tag = work[c].first;
    sets[c].answers.resize(n_buckets);
  }
  parallel_for(work.size() * n_buckets, threads, [&](std::size_t i) {
    const std::size_t c = i / n_buckets;
    const std::size_t b = i % n_buckets;
    sets[c].answers[b] = pir::pir_answer(pk, dbs[b], (*work[c].second)[b]);
  });
  const auto t2 = steady_us();
  if (timing) {
    timing->preprocess_us = t1 - t0;
    timing->reply_us = t2 - t1;
    timing->processing_us = t2 - t0;
  }
  return sets;
}

void Worker::on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  if (!try_handle(from, frame, out)) {
    deferred_.emplace_back(from, frame);
    return;
  }
  drain_deferred(out);
}

void Worker::drain_deferred(Outbox& out) {
  bool progress = true;
  while (progress && !deferred_.empty()) {
    progress = false;
    auto pending = std::move(deferred_);
    deferred_.clear();
    for (auto& [from, frame] : pending) {
      if (try_handle(from, frame, out)) {
        progress = true;
      } else {
        deferred_.emplace_back(from, std::move(frame));
      }
    }
  }
}

bool Worker::try_handle(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  switch (frame.type) {
    case MessageType::RegInfo: {
      auto info = wire::parse<wire::RegInfo>(frame);
      if (info.role == Role::Worker) {
        self_ = {Role::Worker, info.index};
      } else if (info.role == Role::Client) {
        add_client(info.index, info.token);
      }
      return true;
    }
    case MessageType::Hello:
      return true;
    case MessageType::BucketLists: {
      auto lists = wire::parse<wire::BucketLists>(frame);
      pending_lists_[lists.epoch] = std::move(lists.lists);
      return true;
    }
    case MessageType::PhaseAnnounce: {
      auto a = wire::parse<wire::PhaseAnnounce>(frame);
      if (a.code == PhaseCode::EpochStart) {
        auto it = pending_lists_.find(a.epoch);
        if (it == pending_lists_.end()) return false;
        begin_epoch(a, std::move(it->second));
        pending_lists_.erase(pending_lists_.begin(), std::next(it));
        maybe_finish_dialing(out, false);
      } else if (a.code == PhaseCode::RoundStart) {
        if (!epoch_info_ || a.epoch != epoch_info_->epoch) return false;
        if (stage_ == Stage::Dialing) maybe_finish_dialing(out, true);
        round_ = a.round;
        stage_ = Stage::Collecting;
        timer_ = clock_.now_us() + std::int64_t{epoch_info_->schedule.collect_ms} * 2000;
        maybe_answer(out, false);
      } else if (a.code == PhaseCode::Shutdown) {
        stage_ = Stage::Done;
        finished_ = true;
      }
      return true;
    }
    case MessageType::QuerySubmit: {
      auto q = wire::QuerySubmit::decode(frame.payload);
      if (!epoch_info_ || q.epoch > epoch_info_->epoch || !clients_.contains(q.client_tag)) return false;
      if (q.epoch < epoch_info_->epoch) return true;
      try {
        store_queries(q.client_tag, q.token, std::move(q.queries));
      } catch (const Error& e) {
        rec_.event("queries_rejected", e.what());
        return true;
      }
      maybe_finish_dialing(out, false);
      return true;
    }
    case MessageType::MailboxBroadcast: {
      auto b = wire::parse<wire::MailboxBroadcast>(frame);
      if (!epoch_info_ || b.epoch > epoch_info_->epoch) return false;
      if (b.epoch < epoch_info_->epoch || b.round < round_ ||
          (b.round == round_ && stage_ == Stage::Answered)) {
        rec_.event("late_broadcast", from.str());
        return true;
      }
      rec_.timing("broadcast_recv", b.epoch, b.round, b.relay_index, wall_us());
      broadcasts_[b.round][b.relay_index] = std::move(b);
      maybe_answer(out, false);
      return true;
    }
    default:
      rec_.event("unexpected_frame", std::string(wire::to_string(frame.type)) + " from " + from.str());
      return true;
  }
}

void Worker::report(PhaseCode code, Outbox& out) {
  wire::PhaseAnnounce a;
  if (epoch_info_) a = *epoch_info_;
  a.code = code;
  a.round = round_;
  a.sender_index = self_.index;
  a.timestamp_us = wall_us();
  out.send(PeerId::coordinator(), wire::make_frame(a));
}

void Worker::maybe_finish_dialing(Outbox& out, bool forced) {
  if (stage_ != Stage::Dialing) return;
  if (!forced && queries_.size() < clients_.size()) return;
  if (queries_.size() < clients_.size()) rec_.event("queries_missing", std::to_string(clients_.size() - queries_.size()));
  stage_ = Stage::DialDone;
  report(PhaseCode::DialDone, out);
}

void Worker::maybe_answer(Outbox& out, bool forced) {
  if (stage_ != Stage::Collecting) return;
  auto& got = broadcasts_[round_];
  if (!forced && got.size() < epoch_info_->n_relays) return;
  if (got.size() < epoch_info_->n_relays) rec_.event("broadcast_missing", std::to_string(round_));

  const auto t0 = steady_us();
  std::map<std::uint32_t, Bytes> contents;
  for (auto& [relay, b] : got) {
    for (auto& rec : b.records) contents[rec.mailbox_id] = std::move(rec.ciphertext);
  }
  RoundTiming timing;
  auto sets = answer_round(round_, contents, cfg_.threads, &timing);
  if (cfg_.min_round_ms > 0) {
    const auto floor = t0 + std::int64_t{cfg_.min_round_ms} * 1000;
    const auto now = steady_us();
    if (now < floor) std::this_thread::sleep_for(std::chrono::microseconds(floor - now));
  }
  timing.processing_us = steady_us() - t0;
  const auto e = epoch_info_->epoch;
  rec_.timing("preprocess_us", e, round_, self_.index, timing.preprocess_us);
  rec_.timing("reply_us", e, round_, self_.index, timing.reply_us);
  rec_.timing("processing_us", e, round_, self_.index, timing.processing_us);
  for (auto& s : sets) {
    s.sent_us = wall_us();
    rec_.timing("answer_sent", e, round_, s.client_tag, s.sent_us);
    out.send({Role::Client, s.client_tag}, wire::make_frame(s, epoch_info_->he));
  }
  broadcasts_.erase(round_);
  stage_ = Stage::Answered;
  report(PhaseCode::RoundDone, out);
}

std::optional<std::int64_t> Worker::deadline() const {
  if (stage_ == Stage::Dialing || stage_ == Stage::Collecting) return timer_;
  return std::nullopt;
}

void Worker::on_deadline(Outbox& out) {
  if (stage_ == Stage::Dialing) {
    maybe_finish_dialing(out, true);
  } else if (stage_ == Stage::Collecting) {
    maybe_answer(out, true);
  }
}

}  // namespace pirates::nodes
