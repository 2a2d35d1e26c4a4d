#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "pirates/common/rng.hpp"
#include "pirates/crypto/lwe.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/nodes/node.hpp"

namespace pirates::nodes {

struct CoordinatorConfig {
  std::uint32_t n_relays = 1;
  std::uint32_t n_workers = 1;
  std::uint32_t group_size = 3;
  // Start the first epoch as soon as this many clients registered. With 0,
  // the first epoch starts register_ms after the servers are up.
  std::uint32_t expected_clients = 0;
  std::uint32_t register_ms = 2000;
  std::uint32_t epochs = 1;
  std::uint32_t simulated_users = 0;
  // A round whose workers have not all reported after this long is closed
  // anyway and logged as a deadline overrun.
  std::uint32_t round_timeout_ms = 60000;
  wire::Schedule schedule;
  crypto::HeParams he;
  // Seeds mapping seeds and auth tokens; nullopt draws from the OS.
  std::optional<std::uint64_t> seed;
};

class Coordinator final : public Node {
 public:
  Coordinator(CoordinatorConfig config, const Clock& clock, Recorder& recorder);

  PeerId id() const override { return PeerId::coordinator(); }
  void on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) override;
  std::optional<std::int64_t> deadline() const override;
  void on_deadline(Outbox& out) override;
  bool finished() const override { return state_ == State::Done; }

  // Assigns the next mailbox id and round-robin relay/worker. Throws
  // RegistrationClosed once the first epoch has started, InvalidArgument
  // before all servers registered.
  wire::RegInfo register_client(const wire::Hello& hello);
  bool servers_ready() const;

  std::uint64_t epoch() const { return epoch_; }
  std::uint32_t round() const { return round_; }
  std::uint32_t n_clients() const { return static_cast<std::uint32_t>(clients_.size()); }
  const mapping::BucketMapping& mapping() const { return mapping_; }
  const mapping::MappingSeed& seed() const { return seed_; }

 private:
  enum class State { Registration, Dialing, RoundActive, Pacing, Done };

  struct ServerSlot {
    wire::Endpoint listen;
  };
  struct ClientSlot {
    wire::Hello hello;
    wire::Token token{};
    std::uint32_t relay = 0;
    std::uint32_t worker = 0;
  };

  void on_hello(const PeerId& from, const wire::Hello& hello, Outbox& out);
  void admit_client(const PeerId& from, const wire::Hello& hello, Outbox& out);
  void maybe_start_epoch(Outbox& out);
  void start_epoch(Outbox& out);
  void start_round(std::uint32_t round, Outbox& out);
  void round_complete(Outbox& out);
  void shutdown(Outbox& out);
  wire::PhaseAnnounce announce(wire::PhaseCode code) const;
  void broadcast(const wire::Frame& frame, bool relays, bool workers, bool clients, Outbox& out) const;

  CoordinatorConfig cfg_;
  const Clock& clock_;
  Recorder& rec_;
  Rng rng_;

  State state_ = State::Registration;
  std::vector<ServerSlot> relays_;
  std::vector<ServerSlot> workers_;
  std::vector<ClientSlot> clients_;
  std::vector<std::pair<PeerId, wire::Hello>> queued_;
  std::optional<std::int64_t> servers_ready_at_;

  std::uint64_t epoch_ = 0;
  std::uint32_t round_ = 0;
  std::uint32_t n_buckets_ = 0;
  mapping::MappingSeed seed_;
  mapping::BucketMapping mapping_;
  std::set<std::uint32_t> reported_;
  std::int64_t phase_started_ = 0;
  std::int64_t timer_ = 0;
};

}  // namespace pirates::nodes
