#include "pirates/testbed/latency.hpp"

namespace pirates::testbed {

std::array<double, 12> LatencyBreakdown::values() const {
  return {voice_encode, encrypt, c_to_r,     r_to_w,       preprocess, pir_reply,
          w_to_c,       pir_decode, decrypt, voice_decode, additional, total};
}

std::array<double, 10> LatencyBreakdown::measured() const {
  return {voice_encode, encrypt, c_to_r, r_to_w, preprocess, pir_reply, w_to_c, pir_decode, decrypt, voice_decode};
}

double additional_ms(double snippet_ms) { return snippet_ms + kNetworkAllowanceMs + kAudioAllowanceMs; }

double mouth_to_ear(const LatencyBreakdown& b) {
  double sum = b.additional;
  for (double v : b.measured()) sum += v;
  return sum;
}

LatencyBreakdown finalize(LatencyBreakdown b, double snippet_ms) {
  b.additional = additional_ms(snippet_ms);
  b.total = mouth_to_ear(b);
  return b;
}

LatencyBreakdown mean_breakdown(std::span<const LatencyBreakdown> rows) {
  LatencyBreakdown m;
  if (rows.empty()) return m;
  double* fields[] = {&m.voice_encode, &m.encrypt,    &m.c_to_r,  &m.r_to_w,       &m.preprocess, &m.pir_reply,
                      &m.w_to_c,       &m.pir_decode, &m.decrypt, &m.voice_decode, &m.additional, &m.total};
  for (const auto& r : rows) {
    auto v = r.values();
    for (std::size_t i = 0; i < v.size(); ++i) *fields[i] += v[i];
  }
  for (auto* f : fields) *f /= static_cast<double>(rows.size());
  return m;
}

std::vector<ReferenceBreakdown> reference_breakdowns() {
  // Long snippets (200 ms, G=3, 6 clients), large groups (80 ms, G=5,
  // 6 clients), many clients (80 ms, G=3, 11 clients).
  return {
      {"LS", 200, {14.14, 0.04, 11.72, 1.56, 13.68, 81.53, 1.5, 47.13, 0.03, 37.52, 225, 433.84}},
      {"LG", 80, {5.57, 0.02, 1.21, 11.32, 6.31, 107.02, 1.82, 47.01, 0.04, 29.7, 105, 315.01}},
      {"MC", 80, {5.97, 0.02, 0.96, 11.14, 6.73, 91.55, 1.42, 46.83, 0.03, 17.23, 105, 286.98}},
  };
}

}  // namespace pirates::testbed
