#include "pirates/testbed/artifacts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pirates/client/mix.hpp"
#include "pirates/common/errors.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/testbed/csv.hpp"
#include "pirates/wire/snippet.hpp"

namespace pirates::testbed {

namespace fs = std::filesystem;
using wire::Role;

const NodeLog* RunResult::find(Role role, std::uint32_t index) const {
  for (const auto& n : nodes) {
    if (n.role == role && n.index == index) return &n;
  }
  return nullptr;
}

const NodeLog* RunResult::client(std::uint32_t number) const {
  for (const auto& n : nodes) {
    if (n.role == Role::Client && n.client == number) return &n;
  }
  return nullptr;
}

Shape shape_of(const nodes::Recorder& rec) {
  Shape s;
  for (const auto& f : rec.frames) {
    ++s[{f.outgoing ? "out" : "in", nodes::to_string(f.phase), wire::to_string(f.type), f.size}];
  }
  return s;
}

std::map<std::string, Shape> server_shapes(const RunResult& run) {
  std::map<std::string, Shape> out;
  for (const auto& n : run.nodes) {
    if (n.role != Role::Client) out[n.name] = shape_of(n.rec);
  }
  return out;
}

namespace {

std::string key_str(const ShapeKey& k) {
  return std::get<0>(k) + " " + std::get<1>(k) + " " + std::get<2>(k) + " " + std::to_string(std::get<3>(k));
}

}  // namespace

std::vector<std::string> compare_server_shapes(const RunResult& a, const RunResult& b) {
  std::vector<std::string> diffs;
  const auto sa = server_shapes(a);
  const auto sb = server_shapes(b);
  std::set<std::string> names;
  for (const auto& [k, v] : sa) names.insert(k);
  for (const auto& [k, v] : sb) names.insert(k);
  for (const auto& name : names) {
    auto ia = sa.find(name);
    auto ib = sb.find(name);
    if (ia == sa.end() || ib == sb.end()) {
      diffs.push_back(name + ": present in one run only");
      continue;
    }
    std::set<ShapeKey> keys;
    for (const auto& [k, v] : ia->second) keys.insert(k);
    for (const auto& [k, v] : ib->second) keys.insert(k);
    for (const auto& k : keys) {
      auto ca = ia->second.count(k) ? ia->second.at(k) : 0;
      auto cb = ib->second.count(k) ? ib->second.at(k) : 0;
      if (ca != cb) diffs.push_back(name + ": " + key_str(k) + " " + std::to_string(ca) + " vs " + std::to_string(cb));
    }
  }
  return diffs;
}

namespace {

const std::map<std::uint32_t, client::EpochIntent>& intents_of(const Scenario& s, std::uint64_t e) {
  static const std::map<std::uint32_t, client::EpochIntent> none;
  return e >= 1 && e <= s.intents.size() ? s.intents[e - 1] : none;
}

// The call each client should accept in epoch e (1-based), from the
// scenario's intents alone.
std::map<std::uint32_t, std::optional<std::string>> expected_decisions(const Scenario& s, std::uint64_t e) {
  const auto& intents = intents_of(s, e);
  auto dialing_group = [&](std::uint32_t c) -> std::optional<std::string> {
    auto it = intents.find(c);
    if (it == intents.end() || !it->second.dial) return std::nullopt;
    if (s.silent.count(c) || it->second.silent) return std::nullopt;
    return it->second.dial;
  };
  std::map<std::uint32_t, std::optional<std::string>> out;
  for (std::uint32_t c = 1; c <= s.n_clients; ++c) {
    std::optional<crypto::Digest> best;
    std::optional<std::string> best_group;
    for (const auto& [gid, members] : s.groups) {
      if (std::find(members.begin(), members.end(), c) == members.end()) continue;
      std::optional<crypto::Digest> smallest;
      auto consider = [&](const crypto::Digest& d) {
        if (!smallest || d < *smallest) smallest = d;
      };
      for (auto m : members) {
        if (m == c) continue;
        if (dialing_group(m) == gid) consider(dialing::make_invite(s.gmk(gid), s.identity(m), e));
      }
      auto it = intents.find(c);
      if (it != intents.end() && it->second.dial == gid) consider(dialing::make_invite(s.gmk(gid), s.identity(c), e));
      if (smallest && (!best || *smallest < *best)) {
        best = smallest;
        best_group = gid;
      }
    }
    out[c] = best_group;
  }
  return out;
}

bool is_silent(const Scenario& s, std::uint64_t e, std::uint32_t c) {
  if (s.silent.count(c)) return true;
  const auto& in = intents_of(s, e);
  auto it = in.find(c);
  return it != in.end() && it->second.silent;
}

std::uint32_t hangup(const Scenario& s, std::uint64_t e, std::uint32_t c) {
  const auto& in = intents_of(s, e);
  auto it = in.find(c);
  return it == in.end() ? 0 : it->second.hangup_after;
}

}  // namespace

CallCheck check_calls(const RunResult& run) {
  const auto& s = run.scenario;
  CallCheck cc;
  const auto cap = wire::snippet_capacity(s.schedule.snippet_ms, s.schedule.bitrate_bps);

  std::map<std::uint32_t, std::uint32_t> mailbox_of;
  std::map<std::uint32_t, std::uint32_t> client_of;
  for (std::uint32_t c = 1; c <= s.n_clients; ++c) {
    const auto* n = run.client(c);
    if (!n) {
      cc.problems.push_back("missing log for client " + std::to_string(c));
      continue;
    }
    mailbox_of[c] = n->index;
    client_of[n->index] = c;
  }

  for (std::uint64_t e = 1; e <= s.epochs; ++e) {
    const auto decided = expected_decisions(s, e);
    // Recorded decisions and fallbacks.
    std::map<std::uint32_t, bool> in_call;
    for (std::uint32_t c = 1; c <= s.n_clients; ++c) {
      const auto* n = run.client(c);
      if (!n) continue;
      const nodes::DecisionRecord* rec = nullptr;
      for (const auto& d : n->rec.decisions) {
        if (d.epoch == e) rec = &d;
      }
      const auto& want = decided.at(c);
      if (!rec) {
        if (want) {
          ++cc.decisions_wrong;
          cc.problems.push_back("client " + std::to_string(c) + " epoch " + std::to_string(e) + ": no decision");
        }
        continue;
      }
      const std::optional<std::string> got = rec->group.empty() ? std::nullopt : std::optional(rec->group);
      if (got != want) {
        ++cc.decisions_wrong;
        cc.problems.push_back("client " + std::to_string(c) + " epoch " + std::to_string(e) + ": joined '" +
                              rec->group + "' expected '" + want.value_or("") + "'");
      }
      if (got) {
        ++cc.call_attempts;
        if (rec->all_random) ++cc.fallbacks;
      }
      in_call[c] = got && got == want && !rec->all_random;
    }

    for (std::uint32_t round = 1; round <= s.schedule.rounds; ++round) {
      for (std::uint32_t r = 1; r <= s.n_clients; ++r) {
        const auto* n = run.client(r);
        if (!n) continue;
        std::vector<std::pair<std::uint32_t, Bytes>> due;
        if (in_call[r] && !is_silent(s, e, r)) {
          const auto& g = *decided.at(r);
          for (const auto& [gid, members] : s.groups) {
            if (gid != g) continue;
            for (auto m : members) {
              if (m == r || decided.at(m) != g || !in_call[m] || is_silent(s, e, m)) continue;
              const auto h = hangup(s, e, m);
              if (h != 0 && round > h) continue;
              due.emplace_back(mailbox_of[m], client::synthetic_voice(mailbox_of[m], e, round, cap - 2));
            }
          }
        }
        std::sort(due.begin(), due.end());
        std::map<std::uint32_t, const Bytes*> got;
        const Bytes* mixed = nullptr;
        for (const auto& o : n->rec.outputs) {
          if (o.epoch != e || o.round != round) continue;
          if (o.sender == 0) {
            mixed = &o.payload;
          } else {
            got[o.sender] = &o.payload;
          }
        }
        cc.expected += due.size();
        std::vector<std::pair<std::uint32_t, Bytes>> heard;
        for (const auto& [sender, payload] : due) {
          auto it = got.find(sender);
          if (it != got.end() && *it->second == payload) {
            ++cc.recovered;
            heard.emplace_back(sender, payload);
          } else if (cc.problems.size() < 50) {
            cc.problems.push_back("client " + std::to_string(r) + " epoch " + std::to_string(e) + " round " +
                                  std::to_string(round) + ": missing snippet from mailbox " +
                                  std::to_string(sender));
          }
        }
        for (const auto& [sender, p] : got) {
          bool wanted = std::any_of(due.begin(), due.end(), [&](const auto& d) { return d.first == sender; });
          if (!wanted) ++cc.unexpected;
        }
        if (!heard.empty() && heard.size() == due.size()) {
          Bytes want_mix;
          if (s.mix == client::MixMode::Pcm) {
            std::vector<Bytes> parts;
            for (const auto& [x, p] : heard) parts.push_back(p);
            want_mix = client::mix_pcm(parts);
          } else {
            want_mix = client::mix_records(heard);
          }
          if (!mixed || *mixed != want_mix) ++cc.mixed_bad;
        }
      }
    }
  }
  return cc;
}

namespace {

using TimingKey = std::tuple<std::uint64_t, std::uint32_t, std::uint32_t>;

std::map<TimingKey, std::int64_t> collect(const nodes::Recorder& rec, const std::string& name) {
  std::map<TimingKey, std::int64_t> out;
  for (const auto& t : rec.timings) {
    if (t.name == name) out[{t.epoch, t.round, t.subject}] = t.value;
  }
  return out;
}

double ms(double us) { return us / 1000.0; }

}  // namespace

std::vector<LatencyBreakdown> measure_breakdowns(const RunResult& run) {
  // Per-round server figures averaged over relays and workers.
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<double>> r_to_w, pre, reply;
  std::map<TimingKey, std::int64_t> snippet_recv, snippet_sent, answer_sent;
  for (const auto& n : run.nodes) {
    if (n.role == Role::Relay) {
      for (auto& [k, v] : collect(n.rec, "snippet_recv")) snippet_recv[k] = v;
      for (auto& [k, v] : collect(n.rec, "snippet_sent")) snippet_sent[k] = v;
    } else if (n.role == Role::Worker) {
      for (auto& [k, v] : collect(n.rec, "answer_sent")) answer_sent[k] = v;
      for (auto& [k, v] : collect(n.rec, "preprocess_us")) pre[{std::get<0>(k), std::get<1>(k)}].push_back(ms(v));
      for (auto& [k, v] : collect(n.rec, "reply_us")) reply[{std::get<0>(k), std::get<1>(k)}].push_back(ms(v));
      for (auto& [k, recv] : collect(n.rec, "broadcast_recv")) {
        const auto* relay = run.find(Role::Relay, std::get<2>(k));
        if (!relay) continue;
        auto sent = collect(relay->rec, "broadcast_sent");
        auto it = sent.find(k);
        if (it != sent.end()) r_to_w[{std::get<0>(k), std::get<1>(k)}].push_back(ms(recv - it->second));
      }
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double sum = 0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
  };

  std::map<std::uint32_t, const NodeLog*> by_mailbox;
  for (const auto& n : run.nodes) {
    if (n.role == Role::Client) by_mailbox[n.index] = &n;
  }

  std::vector<LatencyBreakdown> rows;
  for (const auto& n : run.nodes) {
    if (n.role != Role::Client) continue;
    const auto decode = collect(n.rec, "pir_decode_us");
    const auto decrypt = collect(n.rec, "decrypt_us");
    const auto mix = collect(n.rec, "mix_us");
    const auto recv = collect(n.rec, "answer_recv");
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<std::uint32_t>> heard;
    for (const auto& o : n.rec.outputs) {
      if (o.sender != 0) heard[{o.epoch, o.round}].push_back(o.sender);
    }
    for (const auto& [er, senders] : heard) {
      const auto [e, r] = er;
      const TimingKey self{e, r, n.index};
      LatencyBreakdown b;
      std::vector<double> enc, crypt, c2r;
      for (auto s : senders) {
        auto it = by_mailbox.find(s);
        if (it == by_mailbox.end()) continue;
        const auto en = collect(it->second->rec, "encode_us");
        const auto cr = collect(it->second->rec, "encrypt_us");
        const TimingKey sk{e, r, s};
        if (en.count(sk)) enc.push_back(ms(en.at(sk)));
        if (cr.count(sk)) crypt.push_back(ms(cr.at(sk)));
        if (snippet_recv.count(sk) && snippet_sent.count(sk)) c2r.push_back(ms(snippet_recv[sk] - snippet_sent[sk]));
      }
      b.voice_encode = mean(enc);
      b.encrypt = mean(crypt);
      b.c_to_r = mean(c2r);
      b.r_to_w = mean(r_to_w[er]);
      b.preprocess = mean(pre[er]);
      b.pir_reply = mean(reply[er]);
      if (recv.count(self) && answer_sent.count(self)) b.w_to_c = ms(recv.at(self) - answer_sent[self]);
      if (decode.count(self)) b.pir_decode = ms(decode.at(self));
      if (decrypt.count(self)) b.decrypt = ms(decrypt.at(self));
      if (mix.count(self)) b.voice_decode = ms(mix.at(self));
      rows.push_back(finalize(b, run.scenario.schedule.snippet_ms));
    }
  }
  return rows;
}

void write_run(const RunResult& run, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "logs", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
  for (const auto& n : run.nodes) n.rec.write_jsonl((fs::path(out_dir) / "logs" / (n.name + ".jsonl")).string(), n.name);

  auto rows = measure_breakdowns(run);
  write_breakdown_csv((fs::path(out_dir) / "breakdown.csv").string(), rows);
  write_transcript_csv((fs::path(out_dir) / "transcript.csv").string(), run);
  write_outputs_csv((fs::path(out_dir) / "outputs.csv").string(), run);
  write_decisions_csv((fs::path(out_dir) / "decisions.csv").string(), run);

  const auto cc = check_calls(run);
  nlohmann::json summary;
  summary["scenario"] = run.scenario.name;
  summary["completed"] = run.completed;
  summary["problems"] = run.problems;
  summary["snippets_expected"] = cc.expected;
  summary["snippets_recovered"] = cc.recovered;
  summary["unexpected_outputs"] = cc.unexpected;
  summary["mixed_mismatches"] = cc.mixed_bad;
  summary["wrong_decisions"] = cc.decisions_wrong;
  summary["call_attempts"] = cc.call_attempts;
  summary["fallbacks"] = cc.fallbacks;
  summary["calls_ok"] = cc.ok();
  if (!rows.empty()) {
    const auto m = mean_breakdown(rows);
    nlohmann::json jb;
    auto v = m.values();
    for (std::size_t i = 0; i < v.size(); ++i) jb[LatencyBreakdown::kColumns[i]] = v[i];
    summary["mean_breakdown_ms"] = jb;
  }
  std::ofstream f(fs::path(out_dir) / "summary.json");
  if (!f) throw Error(ErrorCode::IoError, "cannot write summary.json");
  f << summary.dump(2) << "\n";
}

RunResult read_run_logs(const Scenario& scenario, const std::string& log_dir) {
  RunResult run;
  run.scenario = scenario;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(log_dir)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    NodeLog n;
    n.name = nodes::Recorder::read_jsonl(ss.str(), n.rec);
    // Names are coordinator, relay-<i>, worker-<i> and client-<k>.
    const auto dash = n.name.rfind('-');
    const std::string kind = n.name.substr(0, dash);
    const std::uint32_t num = dash == std::string::npos ? 0 : static_cast<std::uint32_t>(std::stoul(n.name.substr(dash + 1)));
    if (kind == "coordinator") {
      n.role = Role::Coordinator;
    } else if (kind == "relay") {
      n.role = Role::Relay;
      n.index = num;
    } else if (kind == "worker") {
      n.role = Role::Worker;
      n.index = num;
    } else if (kind == "client") {
      n.role = Role::Client;
      n.client = num;
      for (const auto& ev : n.rec.events) {
        if (ev.name == "registered") n.index = static_cast<std::uint32_t>(std::stoul(ev.detail));
      }
    } else {
      run.problems.push_back("unrecognised log " + p.filename().string());
      continue;
    }
    run.nodes.push_back(std::move(n));
  }
  return run;
}

}  // namespace pirates::testbed
