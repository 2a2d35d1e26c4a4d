#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pirates/client/client.hpp"
#include "pirates/common/errors.hpp"
#include "pirates/common/rng.hpp"
#include "pirates/mapping/bucket_mapping.hpp"
#include "pirates/nodes/coordinator.hpp"
#include "pirates/nodes/worker.hpp"
#include "pirates/pir/pir.hpp"
#include "pirates/testbed/artifacts.hpp"
#include "pirates/testbed/dialing_bench.hpp"
#include "pirates/testbed/inproc.hpp"
#include "pirates/testbed/latency.hpp"
#include "pirates/testbed/process_runner.hpp"
#include "pirates/testbed/scalability.hpp"
#include "pirates/testbed/snippet_search.hpp"

using namespace pirates;
using namespace pirates::testbed;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("info " + what); }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

fs::path work_root() { return fs::path(PIRATES_WORK_DIR); }

RunResult run_processes(const Scenario& s, const std::string& tag) {
  ProcessOptions opt;
  opt.bin_dir = PIRATES_TOOLS_DIR;
  opt.work_dir = (work_root() / tag).string();
  fs::create_directories(opt.work_dir);
  opt.timeout = std::chrono::seconds(240);
  return run_scenario_processes(s, opt);
}

// Disjoint groups of size g over clients 1..n, first member of each calls.
Scenario call_scenario(std::uint32_t n, std::uint32_t g, std::uint32_t rounds, std::uint64_t seed) {
  Scenario s;
  s.name = "g" + std::to_string(g);
  s.n_clients = n;
  s.group_size = g;
  s.relays = 2;
  s.workers = 2;
  s.epochs = 1;
  s.seed = seed;
  s.schedule.rounds = rounds;
  s.schedule.snippet_ms = 60;
  s.schedule.round_ms = 100;
  s.schedule.dial_ms = 3000;
  s.schedule.collect_ms = 2000;
  s.intents.resize(1);
  for (std::uint32_t first = 1, k = 1; first + g - 1 <= n; first += g, ++k) {
    std::vector<std::uint32_t> members;
    for (std::uint32_t m = first; m < first + g; ++m) members.push_back(m);
    const auto id = "grp" + std::to_string(k);
    s.groups.emplace_back(id, members);
    client::EpochIntent in;
    in.dial = id;
    s.intents[0][first] = in;
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  Outcome o;
  Rng rng(101);
  const std::size_t n = 64, size = 96;
  auto keys = pir::pir_setup(128, n, rng);
  pir::PirDatabase db(n, size, keys.pk.params.plain_bits);
  std::vector<Bytes> items;
  for (std::size_t i = 1; i <= n; ++i) {
    items.push_back(rng.bytes(size));
    db.send(items.back(), i);
  }
  db.preprocess();
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t correct = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    auto [state, query] = pir::pir_query(keys, i, n, size, rng);
    auto answer = pir::pir_answer(keys.pk, db, query);
    if (pir::pir_decode(keys.sk, state, answer) == items[i - 1]) ++correct;
  }
  const double sweep_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(correct == n, "exhaustive sweep over 64 items of 96 bytes: " + std::to_string(correct) + "/64 correct");
  o.check(sweep_s < 300, "sweep runtime " + fmt(sweep_s) + " s (< 300 s)");

  // Noise safety at the longest selection used by the acceptance runs.
  std::size_t ok = 0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) {
    pir::PirDatabase small(n, 16, keys.pk.params.plain_bits);
    std::vector<Bytes> its;
    for (std::size_t i = 1; i <= n; ++i) {
      its.push_back(rng.bytes(16));
      small.send(its.back(), i);
    }
    small.preprocess();
    const std::size_t idx = 1 + rng.uniform(n);
    auto [state, query] = pir::pir_query(keys, idx, n, 16, rng);
    if (pir::pir_decode(keys.sk, state, pir::pir_answer(keys.pk, small, query)) == its[idx - 1]) ++ok;
  }
  o.check(ok == trials, "noise safety, selection length 64: " + std::to_string(ok) + "/1000 decoded");
  return o;
}

Outcome criterion_2() {
  Outcome o;
  for (std::uint32_t g = 2; g <= 5; ++g) {
    const std::uint32_t n = g * 3 + 1;
    auto s = call_scenario(n, g, 10, 40 + g);
    auto run = run_processes(s, "e2e-g" + std::to_string(g));
    auto cc = check_calls(run);
    std::string detail = "G=" + std::to_string(g) + ", N=" + std::to_string(n) + ", 10 rounds over TCP: " +
                         std::to_string(cc.recovered) + "/" + std::to_string(cc.expected) + " snippets, " +
                         std::to_string(cc.fallbacks) + " fallbacks";
    o.check(run.completed && cc.ok() && cc.expected > 0, detail);
    for (std::size_t i = 0; i < std::min<std::size_t>(5, cc.problems.size()); ++i) o.note(cc.problems[i]);
    for (const auto& p : run.problems) o.note(p);
  }

  std::uint64_t attempts = 0, fallbacks = 0, bad_runs = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto s = call_scenario(16, 3, 10, 1000 + r);
    if (s.n_buckets() != 3) throw Error(ErrorCode::InternalFault, "expected three buckets");
    auto run = run_scenario_inproc(s);
    auto cc = check_calls(run);
    attempts += cc.call_attempts;
    fallbacks += cc.fallbacks;
    if (!run.completed || !cc.ok()) ++bad_runs;
  }
  const double rate = attempts ? static_cast<double>(fallbacks) / static_cast<double>(attempts) : 0.0;
  o.check(bad_runs == 0, "200 seeded runs (N=16, G=3, B=3, 10 rounds): " + std::to_string(200 - bad_runs) +
                             " with every non-fallback snippet recovered");
  o.check(rate < 0.05, "fallback rate " + fmt(rate * 100) + "% over " + std::to_string(attempts) +
                           " call decisions (< 5%)");
  return o;
}

Outcome criterion_3() {
  Outcome o;
  const fs::path dir = fs::path(PIRATES_SOURCE_DIR) / "scenarios" / "pairs";
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().stem().string();
    if (name.size() > 2 && name.substr(name.size() - 2) == "_a") stems.push_back(name.substr(0, name.size() - 2));
  }
  std::sort(stems.begin(), stems.end());
  o.check(stems.size() >= 6, std::to_string(stems.size()) + " scenario pairs");
  for (const auto& stem : stems) {
    auto a = run_processes(load_scenario((dir / (stem + "_a.txt")).string()), "pair-" + stem + "-a");
    auto b = run_processes(load_scenario((dir / (stem + "_b.txt")).string()), "pair-" + stem + "-b");
    auto diffs = compare_server_shapes(a, b);
    const auto servers = server_shapes(a).size();
    o.check(a.completed && b.completed && diffs.empty() && servers == 1 + a.scenario.relays + a.scenario.workers,
            stem + ": " + std::to_string(servers) + " server transcripts, " + std::to_string(diffs.size()) +
                " differences");
    for (std::size_t i = 0; i < std::min<std::size_t>(5, diffs.size()); ++i) o.note(diffs[i]);
  }
  return o;
}

Outcome criterion_4() {
  Outcome o;
  Rng rng(404);
  std::size_t agree = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Scenario s;
    s.name = "mapping";
    s.n_clients = 3 + static_cast<std::uint32_t>(rng.uniform(14));
    s.group_size = 2 + static_cast<std::uint32_t>(rng.uniform(7));
    s.simulated_users = rng.uniform(2) ? static_cast<std::uint32_t>(rng.uniform(48)) : 0;
    s.relays = 1 + static_cast<std::uint32_t>(rng.uniform(2));
    s.workers = 1 + static_cast<std::uint32_t>(rng.uniform(2));
    s.seed = 9000 + seed;
    s.schedule.rounds = 1;
    s.schedule.snippet_ms = 40;
    s.schedule.round_ms = 40;
    s.intents.resize(1);
    bool same = true;
    auto run = run_scenario_inproc(s, [&](const InprocNodes& nodes) {
      const auto& reference = nodes.coordinator->mapping().bucket_lists();
      for (auto* w : nodes.workers) same = same && w->bucket_lists() == reference;
      for (auto* c : nodes.clients) same = same && c->mapping().bucket_lists() == reference;
      same = same && reference.size() == s.n_buckets();
    });
    if (same && run.completed) ++agree;
  }
  o.check(agree == 100, "worker and client bucket lists identical for " + std::to_string(agree) + "/100 seeds");
  return o;
}

bool sdr_exists(const std::vector<std::array<std::uint32_t, 3>>& sets, std::size_t i, std::vector<bool>& used) {
  if (i == sets.size()) return true;
  for (auto b : sets[i]) {
    if (used[b - 1]) continue;
    used[b - 1] = true;
    const bool ok = sdr_exists(sets, i + 1, used);
    used[b - 1] = false;
    if (ok) return true;
  }
  return false;
}

Outcome criterion_5() {
  Outcome o;
  Rng rng(505);
  std::uint64_t instances = 0, mismatches = 0, infeasible = 0;
  for (std::uint32_t n = 1; n <= 16; ++n) {
    for (std::uint32_t b = 3; b <= 6; ++b) {
      for (int rep = 0; rep < 3; ++rep) {
        mapping::MappingSeed seed;
        rng.fill(seed.bytes);
        const auto m = mapping::build_mapping(n, b, seed);
        // Every target set of size 1..4 drawn from the n mailboxes.
        std::vector<std::uint32_t> pick;
        std::function<void(std::uint32_t)> rec = [&](std::uint32_t next) {
          if (!pick.empty()) {
            ++instances;
            std::vector<std::array<std::uint32_t, 3>> sets;
            for (auto t : pick) sets.push_back(m.assignment(t).buckets);
            std::vector<bool> used(b, false);
            const bool feasible = pick.size() <= b && sdr_exists(sets, 0, used);
            if (!feasible) ++infeasible;
            bool agrees = false;
            try {
              auto sel = mapping::select_indices(pick, m, rng);
              agrees = sel.all_random != feasible;
              if (agrees && !sel.all_random) {
                std::vector<std::uint32_t> hit;
                for (std::uint32_t k = 1; k <= b; ++k) {
                  if (!sel.is_real(k)) continue;
                  const auto id = *sel.targets[k - 1];
                  hit.push_back(id);
                  agrees = agrees && m.bucket(k).at(sel.positions[k - 1] - 1) == id;
                }
                std::sort(hit.begin(), hit.end());
                agrees = agrees && hit == pick;
              }
            } catch (const Error& e) {
              agrees = e.code() == ErrorCode::InvalidArgument && pick.size() > b;
            }
            if (!agrees) ++mismatches;
          }
          if (pick.size() == 4) return;
          for (std::uint32_t t = next; t <= n; ++t) {
            pick.push_back(t);
            rec(t + 1);
            pick.pop_back();
          }
        };
        rec(1);
      }
    }
  }
  o.check(mismatches == 0, std::to_string(instances) + " instances (N<=16, B<=6, up to 4 targets), " +
                               std::to_string(infeasible) + " infeasible, " + std::to_string(mismatches) +
                               " disagreements with brute force");
  return o;
}

Outcome criterion_6() {
  Outcome o;
  auto within = [](double got, double want) { return std::abs(got - want) / want <= 0.02; };
  struct Anchor {
    double workers;
    bool pirates;
    double want;
  };
  for (const Anchor& a : {Anchor{20, false, 0.5307}, Anchor{100, false, 0.2038}, Anchor{220, false, 0.2702},
                          Anchor{220, true, 0.0667}}) {
    const double got =
        analytic_scalability(a.pirates ? pirates_params(a.workers) : addra_params(a.workers)).total;
    o.check(within(got, a.want), std::string(a.pirates ? "PIRATES" : "Addra") + " at " + fmt(a.workers) +
                                     " workers: " + fmt(got, 6) + " s vs " + fmt(a.want) + " s");
  }
  std::vector<double> addra, pir;
  for (const auto& r : scalability_sweep(20, 220, 40, 20)) {
    addra.push_back(r.addra_s);
    pir.push_back(r.pirates_s);
    if (r.has_anchor)
      o.note("workers " + fmt(r.workers) + ": Addra delta " + fmt(r.addra_s - r.anchor_addra_s, 3) +
             " s, PIRATES delta " + fmt(r.pirates_s - r.anchor_pirates_s, 3) + " s");
  }
  o.check(addra.front() == pir.front(), "curves coincide at 20 workers / 1 relay");
  bool nonincreasing = true;
  for (std::size_t i = 1; i < pir.size(); ++i) nonincreasing = nonincreasing && pir[i] <= pir[i - 1];
  o.check(nonincreasing, "PIRATES curve non-increasing over 20..220 workers");
  const auto argmin = std::min_element(addra.begin(), addra.end()) - addra.begin();
  o.check(argmin == 2, "Addra minimum at " + fmt(20 + 40.0 * static_cast<double>(argmin)) + " workers (interior, 100)");

  Rng rng(606);
  bool identical = true;
  for (int i = 0; i < 200; ++i) {
    ScalabilityParams p;
    p.n_clients = 1 + static_cast<double>(rng.uniform(1 << 20));
    p.n_workers = 1 + static_cast<double>(rng.uniform(500));
    p.snippet_bits = 8 + static_cast<double>(rng.uniform(4000));
    p.reply_s = 0.001 + rng.unit();
    auto single = p;
    single.n_relays = 1;
    auto baseline = addra_params(p.n_workers);
    baseline.n_clients = p.n_clients;
    baseline.snippet_bits = p.snippet_bits;
    baseline.reply_s = p.reply_s;
    identical = identical && analytic_scalability(single).total == analytic_scalability(baseline).total;
  }
  o.check(identical, "one relay reproduces the baseline for 200 random parameter draws");
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const auto pir = bench_dialing(1u << 15, 8, DialMode::Pirates, 100, 71);
  const auto gad = bench_dialing(1u << 15, 8, DialMode::Gaddra, 100, 72);
  const double speedup = gad.mean_us / pir.mean_us;
  o.check(speedup >= 100, "N=2^15, G=8: PIRATES " + fmt(pir.mean_us) + " us, GAddra " + fmt(gad.mean_us) +
                              " us, speedup " + fmt(speedup) + "x (>= 100x)");

  std::vector<double> ns, ts;
  for (std::uint32_t e = 12; e <= 17; ++e) {
    const auto r = bench_dialing(1u << e, 8, DialMode::Gaddra, 100, 700 + e);
    ns.push_back(static_cast<double>(1u << e));
    ts.push_back(r.mean_us);
    o.note("GAddra N=2^" + std::to_string(e) + ": " + fmt(r.mean_us) + " us");
  }
  const auto fit = fit_linear(ns, ts);
  o.check(fit.r2 >= 0.98, "GAddra linear in N: R^2 = " + fmt(fit.r2, 6) + " (>= 0.98)");

  std::vector<double> lg, lt;
  for (std::uint32_t g : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const auto r = bench_dialing(1u << 15, g, DialMode::Pirates, 100, 800 + g);
    lg.push_back(std::log(static_cast<double>(g)));
    lt.push_back(std::log(r.mean_us));
    o.note("PIRATES G=" + std::to_string(g) + ": " + fmt(r.mean_us) + " us");
  }
  const auto growth = fit_linear(lg, lt);
  o.check(growth.slope <= 1.1, "PIRATES growth in G: log-log slope " + fmt(growth.slope, 3) + " (<= 1.1)");
  return o;
}

Outcome criterion_8() {
  Outcome o;
  for (const auto& ref : reference_breakdowns()) {
    const double got = mouth_to_ear(ref.row);
    o.check(std::abs(ref.row.additional - additional_ms(ref.snippet_ms)) < 1e-9,
            std::string(ref.label) + ": additional " + fmt(additional_ms(ref.snippet_ms)) + " ms for " +
                fmt(ref.snippet_ms) + " ms snippets");
    o.check(std::abs(got - ref.row.total) <= 0.05, std::string(ref.label) + ": parts sum to " + fmt(got, 6) +
                                                      " ms, published total " + fmt(ref.row.total, 6) + " ms");
  }

  auto probe_for = [](std::uint32_t throttle_ms) {
    return [throttle_ms](std::uint32_t ms) {
      auto s = call_scenario(4, 3, 3, 77);
      s.worker_min_round_ms = throttle_ms;
      s.schedule.snippet_ms = ms;
      s.schedule.round_ms = ms;
      auto run = run_scenario_inproc(s);
      double sum = 0;
      std::size_t n = 0;
      for (const auto& node : run.nodes) {
        for (const auto& t : node.rec.timings) {
          if (t.name == "processing_us") {
            sum += static_cast<double>(t.value) / 1000.0;
            ++n;
          }
        }
      }
      return n ? sum / static_cast<double>(n) : 0.0;
    };
  };
  auto throttled = search_snippet(40, 60, 20, probe_for(50));
  std::string ratios;
  for (const auto& c : throttled.candidates) ratios += " " + std::to_string(c.snippet_ms) + "ms:" + fmt(c.ratio, 3);
  o.check(throttled.best_ms == 60, "worker throttled to 50 ms/round picks " + std::to_string(throttled.best_ms) +
                                       " ms from {40,60} (ratios" + ratios + ")");
  auto free = search_snippet(40, 60, 20, probe_for(0));
  o.check(free.best_ms == 40, "unthrottled tiny instance picks " + std::to_string(free.best_ms) + " ms");
  bool none = false;
  try {
    search_snippet(40, 60, 20, [](std::uint32_t ms) { return 2.0 * ms; });
  } catch (const Error& e) {
    none = e.code() == ErrorCode::NoFeasible;
  }
  o.check(none, "all ratios above 1.1 reports NoFeasible");

  auto run = run_scenario_inproc(call_scenario(6, 3, 5, 88));
  auto rows = measure_breakdowns(run);
  if (!rows.empty()) {
    const auto m = mean_breakdown(rows);
    std::string line;
    auto v = m.values();
    for (std::size_t i = 0; i < v.size(); ++i) line += std::string(i ? ", " : "") + LatencyBreakdown::kColumns[i] + "=" + fmt(v[i], 3);
    o.note("measured (in-process, 60 ms snippets): " + line);
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "PIR correctness sweep", criterion_1},
    {2, "end-to-end call correctness", criterion_2},
    {3, "privacy traffic shape", criterion_3},
    {4, "mapping agreement", criterion_4},
    {5, "matching oracle equivalence", criterion_5},
    {6, "analytic scalability", criterion_6},
    {7, "dialing benchmarks", criterion_7},
    {8, "mouth-to-ear formula consistency", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "all") {
      for (const auto& c : kCriteria) wanted.push_back(c.id);
    } else {
      wanted.push_back(std::stoi(a));
    }
  }
  if (wanted.empty()) {
    std::cerr << "usage: acceptance all | N...\n";
    return 2;
  }
  bool all_pass = true;
  for (int id : wanted) {
    const Criterion* c = nullptr;
    for (const auto& k : kCriteria) {
      if (k.id == id) c = &k;
    }
    if (!c) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = c->fn();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& n : out.notes) std::cout << "  " << n << "\n";
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c->id << ": " << c->title << " (" << fmt(secs, 3)
              << " s)" << std::endl;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
