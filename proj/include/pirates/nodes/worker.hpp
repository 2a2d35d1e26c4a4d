#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pirates/common/rng.hpp"
#include "pirates/nodes/node.hpp"
#include "pirates/pir/pir.hpp"

namespace pirates::nodes {

struct WorkerConfig {
  wire::Endpoint coordinator;
  wire::Endpoint listen;  // advertised to relays and clients
  unsigned threads = 1;
  // Pads each round's processing to at least this long (synthetic load).
  std::uint32_t min_round_ms = 0;
  std::optional<std::uint64_t> seed;
};

struct RoundTiming {
  std::int64_t preprocess_us = 0;
  std::int64_t reply_us = 0;
  std::int64_t processing_us = 0;
};

class Worker final : public Node {
 public:
  Worker(WorkerConfig config, const Clock& clock, Recorder& recorder, std::uint32_t pending_tag = 0);

  PeerId id() const override { return self_; }
  void start(Outbox& out) override;
  void on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) override;
  std::optional<std::int64_t> deadline() const override;
  void on_deadline(Outbox& out) override;
  bool finished() const override { return finished_; }

  void add_client(std::uint32_t tag, const wire::Token& token);
  void begin_epoch(const wire::PhaseAnnounce& announce, std::vector<std::vector<std::uint32_t>> lists);
  // Replaces any earlier set from the same client. Throws UnknownClient,
  // BadToken, WrongQueryCount or LengthMismatch.
  void store_queries(std::uint32_t tag, const wire::Token& token, std::vector<pir::PirQuery> queries);
  // Assembles every bucket from `contents` (mailbox id -> record; gaps are
  // filled with random bytes) and answers all stored queries, sorted by
  // client tag.
  std::vector<wire::AnswerSet> answer_round(std::uint32_t round,
                                            const std::map<std::uint32_t, Bytes>& contents,
                                            unsigned threads, RoundTiming* timing = nullptr);

  std::uint32_t index() const { return self_.index; }
  std::size_t n_clients() const { return clients_.size(); }
  std::size_t n_stored() const { return queries_.size(); }
  const std::vector<std::vector<std::uint32_t>>& bucket_lists() const { return lists_; }
  std::size_t record_size() const { return record_size_; }

 private:
  enum class Stage { Idle, Dialing, DialDone, Collecting, Answered, Done };

  bool try_handle(const PeerId& from, const wire::Frame& frame, Outbox& out);
  void drain_deferred(Outbox& out);
  void maybe_finish_dialing(Outbox& out, bool forced);
  void maybe_answer(Outbox& out, bool forced);
  void report(wire::PhaseCode code, Outbox& out);

  WorkerConfig cfg_;
  const Clock& clock_;
  Recorder& rec_;
  Rng rng_;
  PeerId self_;
  bool finished_ = false;

  std::map<std::uint32_t, wire::Token> clients_;
  std::map<std::uint64_t, std::vector<std::vector<std::uint32_t>>> pending_lists_;
  std::optional<wire::PhaseAnnounce> epoch_info_;
  std::vector<std::vector<std::uint32_t>> lists_;
  std::size_t record_size_ = 0;
  std::map<std::uint32_t, std::vector<pir::PirQuery>> queries_;

  Stage stage_ = Stage::Idle;
  std::uint32_t round_ = 0;
  std::int64_t timer_ = 0;
  // round -> relay index -> records
  std::map<std::uint32_t, std::map<std::uint32_t, wire::MailboxBroadcast>> broadcasts_;
  std::vector<std::pair<PeerId, wire::Frame>> deferred_;
};

}  // namespace pirates::nodes
