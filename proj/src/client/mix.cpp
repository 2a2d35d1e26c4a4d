#include "pirates/client/mix.hpp"

#include <algorithm>
#include <limits>

#include "pirates/crypto/hash.hpp"

namespace pirates::client {

Bytes mix_pcm(std::span<const Bytes> payloads) {
  std::size_t len = 0;
  for (const auto& p : payloads) len = std::max(len, p.size());
  len &= ~std::size_t{1};
  Bytes out(len, 0);
  for (std::size_t i = 0; i < len; i += 2) {
    std::int32_t acc = 0;
    for (const auto& p : payloads) {
      if (i + 1 >= p.size()) continue;
      acc += static_cast<std::int16_t>(static_cast<std::uint16_t>(p[i] | (p[i + 1] << 8)));
    }
    acc = std::clamp<std::int32_t>(acc, std::numeric_limits<std::int16_t>::min(),
                                   std::numeric_limits<std::int16_t>::max());
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(acc));
    out[i] = static_cast<std::uint8_t>(u);
    out[i + 1] = static_cast<std::uint8_t>(u >> 8);
  }
  return out;
}

Bytes mix_records(std::span<const std::pair<std::uint32_t, Bytes>> snippets) {
  Writer w;
  for (const auto& [sender, payload] : snippets) {
    w.u32(sender).u16(static_cast<std::uint16_t>(payload.size())).raw(payload);
  }
  return std::move(w).take();
}

std::vector<std::pair<std::uint32_t, Bytes>> split_records(ByteView mixed) {
  Reader r(mixed);
  std::vector<std::pair<std::uint32_t, Bytes>> out;
  while (!r.done()) {
    const auto sender = r.u32();
    auto payload = r.raw(r.u16());
    out.emplace_back(sender, Bytes(payload.begin(), payload.end()));
  }
  return out;
}

Bytes synthetic_voice(std::uint32_t sender, std::uint64_t epoch, std::uint32_t round, std::size_t size) {
  Writer w;
  w.raw(as_bytes("voice")).u32(sender).u64(epoch).u32(round);
  const auto d = crypto::hash(w.bytes());
  Bytes out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = d.bytes[i % d.bytes.size()];
  return out;
}

}  // namespace pirates::client
