#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pirates/client/mix.hpp"
#include "pirates/common/rng.hpp"
#include "pirates/crypto/sym.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/nodes/node.hpp"
#include "pirates/pir/pir.hpp"

namespace pirates::client {

using nodes::Outbox;
using nodes::PeerId;

// What the client does in one epoch.
struct EpochIntent {
  std::optional<std::string> dial;  // group id to call
  // Last round with real voice; later rounds carry dummies. 0 = whole epoch.
  std::uint32_t hangup_after = 0;
  // Sends nothing at all (an offline client).
  bool silent = false;
};

// "g1,-,g1/3,!" -> dial g1; idle; dial g1 and hang up after round 3; silent.
std::vector<EpochIntent> parse_plan(const std::string& text);

// One group per line: id, hex GMK, then hex member public keys, separated by
// whitespace. '#' starts a comment. Groups not containing `self` are
// rejected with InvalidArgument.
std::vector<dialing::GroupDescriptor> parse_group_file(const std::string& text, const dialing::PublicKey& self);
std::string format_group_file(const std::vector<dialing::GroupDescriptor>& groups);

struct ClientConfig {
  wire::Endpoint coordinator;
  dialing::PublicKey identity;
  std::vector<dialing::GroupDescriptor> groups;
  std::vector<EpochIntent> plan;  // epoch e uses plan[e-1]; idle beyond
  MixMode mix = MixMode::Records;
  std::uint32_t security_param = 128;
  std::optional<std::uint64_t> seed;
};

class Client final : public nodes::Node {
 public:
  Client(ClientConfig config, const nodes::Clock& clock, nodes::Recorder& recorder,
         std::uint32_t pending_tag = 0);

  PeerId id() const override { return self_; }
  void start(Outbox& out) override;
  void on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) override;
  std::optional<std::int64_t> deadline() const override;
  void on_deadline(Outbox& out) override;
  bool finished() const override { return finished_; }

  std::uint32_t mailbox() const { return mailbox_; }
  bool rejected() const { return rejected_; }
  bool in_call() const { return in_call_; }
  const std::optional<dialing::DialDecision>& decision() const { return decision_; }
  const mapping::IndexSelection& selection() const { return selection_; }
  const mapping::BucketMapping& mapping() const { return mapping_; }

 private:
  enum class Stage { Registering, Registered, AwaitInvites, Querying, Done };

  const EpochIntent& intent(std::uint64_t epoch) const;
  bool awaiting_answers() const;
  void on_announce(const wire::PhaseAnnounce& a, Outbox& out);
  void release_held(Outbox& out);
  void on_epoch_start(const wire::PhaseAnnounce& a, Outbox& out);
  void finish_dialing(Outbox& out);
  void run_round(std::uint32_t round, Outbox& out);
  void on_answers(const wire::AnswerSet& answers);

  ClientConfig cfg_;
  const nodes::Clock& clock_;
  nodes::Recorder& rec_;
  Rng rng_;
  PeerId self_;
  bool finished_ = false;
  bool rejected_ = false;

  std::uint32_t mailbox_ = 0;
  wire::Token token_{};
  PeerId relay_;
  PeerId worker_;

  Stage stage_ = Stage::Registering;
  std::int64_t timer_ = 0;
  std::optional<wire::PhaseAnnounce> epoch_info_;
  std::optional<wire::Directory> directory_;
  std::vector<dialing::Invite> received_;
  std::uint32_t broadcasts_seen_ = 0;
  dialing::Invite own_invite_;
  mapping::BucketMapping mapping_;
  mapping::IndexSelection selection_;
  std::optional<dialing::DialDecision> decision_;
  bool in_call_ = false;
  pir::PirKeys keys_;
  std::vector<pir::PirState> states_;
  std::optional<crypto::SymCipher> cipher_;
  std::size_t capacity_ = 0;
  std::uint32_t sent_round_ = 0;
  std::uint32_t answered_round_ = 0;
  std::optional<wire::PhaseAnnounce> held_;
  std::int64_t hold_until_ = 0;
  std::vector<std::pair<PeerId, wire::Frame>> deferred_;
};

}  // namespace pirates::client
