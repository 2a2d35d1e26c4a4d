#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pirates/common/rng.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/nodes/node.hpp"

namespace pirates::nodes {

struct RelayConfig {
  wire::Endpoint coordinator;
  wire::Endpoint listen;  // advertised to clients
  std::optional<std::uint64_t> seed;
};

class Relay final : public Node {
 public:
  Relay(RelayConfig config, const Clock& clock, Recorder& recorder, std::uint32_t pending_tag = 0);

  PeerId id() const override { return self_; }
  void start(Outbox& out) override;
  void on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) override;
  std::optional<std::int64_t> deadline() const override;
  void on_deadline(Outbox& out) override;
  bool finished() const override { return finished_; }

  // Direct entry points, also driven by on_frame.
  void add_client(std::uint32_t mailbox, const wire::Token& token);
  void begin_epoch(const wire::PhaseAnnounce& announce);
  // Last write wins. Throws UnknownClient, BadToken (slot untouched) or
  // WrongSize.
  void accept_invite(const wire::InviteSubmit& submit);
  void accept_snippet(std::uint64_t epoch, std::uint32_t round, std::uint32_t mailbox,
                      const wire::Token& token, ByteView ciphertext);
  // One invite per assigned client sorted by mailbox id; missing ones are
  // replaced by cover invites.
  wire::InviteBroadcast collect_invites();
  // One record per assigned mailbox (sorted) followed by the simulated
  // duplicates this relay owns; missing submissions become random bytes.
  wire::MailboxBroadcast broadcast_mailboxes(std::uint32_t round);

  std::uint32_t index() const { return self_.index; }
  std::size_t ciphertext_size() const { return ct_size_; }
  std::size_t n_clients() const { return clients_.size(); }

 private:
  enum class Stage { Idle, Invites, InvitesSent, Snippets, SnippetsSent, Done };

  bool try_handle(const PeerId& from, const wire::Frame& frame, Outbox& out);
  void drain_deferred(Outbox& out);
  void maybe_flush(Outbox& out, bool forced);

  RelayConfig cfg_;
  const Clock& clock_;
  Recorder& rec_;
  Rng rng_;
  PeerId self_;
  bool finished_ = false;

  std::vector<wire::Endpoint> workers_;
  std::map<std::uint32_t, wire::Token> clients_;
  std::optional<wire::PhaseAnnounce> epoch_info_;
  mapping::BucketMapping mapping_;
  std::vector<std::uint32_t> owned_simulated_;
  std::size_t ct_size_ = 0;

  Stage stage_ = Stage::Idle;
  std::uint32_t round_ = 0;
  std::int64_t timer_ = 0;
  std::map<std::uint32_t, dialing::Invite> invites_;
  // (round) -> mailbox -> ciphertext, for the current epoch.
  std::map<std::uint32_t, std::map<std::uint32_t, Bytes>> snippets_;
  std::vector<std::pair<PeerId, wire::Frame>> deferred_;
};

}  // namespace pirates::nodes
