#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pirates/common/rng.hpp"
#include "pirates/dialing/invite.hpp"

namespace pirates::dialing {

// Encryption-based dialing baseline used only for benchmarking: an invite is
// AES-128-CBC("hello") under the group key, prefixed by its random IV.
struct GaddraInvite {
  std::array<std::uint8_t, 32> bytes{};
};

GaddraInvite gaddra_make_invite(const crypto::GroupMasterKey& gmk, Rng& rng);

// Decrypts every received invite under every group key and reports the
// indices of groups for which some invite decrypts to "hello".
std::vector<std::size_t> gaddra_process(std::span<const GaddraInvite> received,
                                        std::span<const GroupDescriptor> my_groups);

}  // namespace pirates::dialing
