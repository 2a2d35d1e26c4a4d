#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace pirates::testbed {

inline constexpr double kNetworkAllowanceMs = 15.0;
inline constexpr double kAudioAllowanceMs = 10.0;

// All values in milliseconds.
struct LatencyBreakdown {
  double voice_encode = 0;
  double encrypt = 0;
  double c_to_r = 0;
  double r_to_w = 0;
  double preprocess = 0;
  double pir_reply = 0;
  double w_to_c = 0;
  double pir_decode = 0;
  double decrypt = 0;
  double voice_decode = 0;
  double additional = 0;
  double total = 0;

  static constexpr std::array<const char*, 12> kColumns = {
      "voice_encode", "encrypt", "c_to_r", "r_to_w", "preprocess", "pir_reply",
      "w_to_c", "pir_decode", "decrypt", "voice_decode", "additional", "total"};
  std::array<double, 12> values() const;
  // Parts in column order, excluding `additional` and `total`.
  std::array<double, 10> measured() const;
};

// One snippet length for recording and playback plus fixed network and
// audio stack allowances.
double additional_ms(double snippet_ms);
// Sum of the measured parts plus the additional column.
double mouth_to_ear(const LatencyBreakdown& b);
// Sets `additional` from the snippet length and `total` from the parts.
LatencyBreakdown finalize(LatencyBreakdown b, double snippet_ms);
LatencyBreakdown mean_breakdown(std::span<const LatencyBreakdown> rows);

// Published breakdowns used to check the formula against its own numbers.
struct ReferenceBreakdown {
  const char* label;
  double snippet_ms;
  LatencyBreakdown row;
};
std::vector<ReferenceBreakdown> reference_breakdowns();

}  // namespace pirates::testbed
