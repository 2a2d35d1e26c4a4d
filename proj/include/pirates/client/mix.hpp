#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pirates/common/bytes.hpp"

namespace pirates::client {

enum class MixMode : std::uint8_t { Pcm, Records };

// Payloads as little-endian signed 16-bit samples, summed per sample with
// saturation. Shorter payloads are treated as zero-extended; an odd trailing
// byte is ignored.
Bytes mix_pcm(std::span<const Bytes> payloads);

// u32be sender id, u16be length, payload; in the given order.
Bytes mix_records(std::span<const std::pair<std::uint32_t, Bytes>> snippets);
std::vector<std::pair<std::uint32_t, Bytes>> split_records(ByteView mixed);

// Deterministic stand-in for encoded speech: hash("voice" || u32be sender ||
// u64be epoch || u32be round) repeated to `size` bytes.
Bytes synthetic_voice(std::uint32_t sender, std::uint64_t epoch, std::uint32_t round, std::size_t size);

}  // namespace pirates::client
