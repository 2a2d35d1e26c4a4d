#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pirates/client/client.hpp"
#include "pirates/crypto/lwe.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/wire/messages.hpp"

namespace pirates::testbed {

// Clients are numbered 1..n_clients in registration order, so client k
// receives mailbox id k.
struct Scenario {
  std::string name = "scenario";
  std::uint32_t n_clients = 0;
  std::uint32_t group_size = 3;
  std::uint32_t relays = 1;
  std::uint32_t workers = 1;
  std::uint32_t epochs = 1;
  std::uint32_t simulated_users = 0;
  std::uint64_t seed = 1;
  unsigned worker_threads = 1;
  std::uint32_t worker_min_round_ms = 0;
  client::MixMode mix = client::MixMode::Records;
  wire::Schedule schedule;
  crypto::HeParams he;

  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> groups;
  std::set<std::uint32_t> silent;
  // epochs entries; each maps client -> intent.
  std::vector<std::map<std::uint32_t, client::EpochIntent>> intents;

  // Checks the invariants (declared groups, members in range, dialers in
  // their group, at most one intent per client and epoch). Throws
  // ScenarioSyntax.
  void validate() const;

  // Keys derived from the seed, so paired scenarios share identities.
  dialing::PublicKey identity(std::uint32_t client) const;
  crypto::GroupMasterKey gmk(const std::string& group) const;
  std::vector<dialing::GroupDescriptor> groups_of(std::uint32_t client) const;
  std::vector<client::EpochIntent> plan_of(std::uint32_t client) const;
  std::string plan_string(std::uint32_t client) const;

  std::uint32_t n_buckets() const;
  std::uint64_t coordinator_seed() const { return seed * 1000003ULL + 1; }
  std::uint64_t server_seed(wire::Role role, std::uint32_t index) const;
  std::uint64_t client_seed(std::uint32_t client) const;
};

// Line-oriented text with [params], [groups], [clients] and [epochs]
// sections; see docs/scenario-format.md.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string format_scenario(const Scenario& s);

}  // namespace pirates::testbed
