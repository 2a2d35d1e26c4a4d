#include "pirates/testbed/dialing_bench.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "pirates/common/errors.hpp"
#include "pirates/common/rng.hpp"
#include "pirates/dialing/gaddra.hpp"
#include "pirates/dialing/invite.hpp"

namespace pirates::testbed {

DialMode parse_dial_mode(const std::string& text) {
  if (text == "pirates") return DialMode::Pirates;
  if (text == "gaddra") return DialMode::Gaddra;
  throw Error(ErrorCode::InvalidArgument, "mode must be pirates or gaddra");
}

const char* to_string(DialMode mode) { return mode == DialMode::Pirates ? "pirates" : "gaddra"; }

namespace {

dialing::GroupDescriptor random_group(std::uint32_t size, Rng& rng) {
  dialing::GroupDescriptor g;
  g.id = "bench";
  rng.fill(g.gmk.bytes);
  g.members.resize(size);
  for (auto& m : g.members) rng.fill(m.bytes);
  g.my_index = 0;
  return g;
}

volatile std::size_t g_sink = 0;

}  // namespace

DialBenchResult bench_dialing(std::uint32_t n, std::uint32_t group, DialMode mode, std::uint32_t reps,
                              std::uint64_t seed) {
  if (n == 0 || group < 2 || reps == 0) throw Error(ErrorCode::InvalidArgument, "bad benchmark size");
  Rng rng(seed);
  std::vector<double> samples;
  samples.reserve(reps);
  const std::uint64_t epoch = 1;
  for (std::uint32_t rep = 0; rep < reps; ++rep) {
    std::vector<dialing::GroupDescriptor> groups{random_group(group, rng)};
    double us = 0;
    if (mode == DialMode::Pirates) {
      std::vector<dialing::Invite> invites;
      invites.reserve(n);
      invites.push_back(dialing::make_invite(groups[0].gmk, groups[0].members[1], epoch));
      for (std::uint32_t i = 1; i < n; ++i) invites.push_back(dialing::make_cover_invite(rng));
      dialing::InviteSet set(invites);
      const auto t0 = std::chrono::steady_clock::now();
      auto matches = dialing::process_invites(set, groups, epoch);
      const auto t1 = std::chrono::steady_clock::now();
      g_sink = g_sink + matches.size();
      us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    } else {
      std::vector<dialing::GaddraInvite> invites;
      invites.reserve(n);
      invites.push_back(dialing::gaddra_make_invite(groups[0].gmk, rng));
      crypto::GroupMasterKey other;
      rng.fill(other.bytes);
      for (std::uint32_t i = 1; i < n; ++i) invites.push_back(dialing::gaddra_make_invite(other, rng));
      const auto t0 = std::chrono::steady_clock::now();
      auto hits = dialing::gaddra_process(invites, groups);
      const auto t1 = std::chrono::steady_clock::now();
      g_sink = g_sink + hits.size();
      us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    }
    samples.push_back(us);
  }
  DialBenchResult r;
  r.mode = mode;
  r.n = n;
  r.group = group;
  r.reps = reps;
  r.mean_us = std::accumulate(samples.begin(), samples.end(), 0.0) / reps;
  double var = 0;
  for (double s : samples) var += (s - r.mean_us) * (s - r.mean_us);
  r.stddev_us = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
  return r;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need two points to fit");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace pirates::testbed
