#include "pirates/testbed/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/hash.hpp"
#include "pirates/mapping/bucket_mapping.hpp"

namespace pirates::testbed {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void syntax(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ScenarioSyntax, "line " + std::to_string(line) + ": " + what);
}

std::uint64_t to_u64(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    auto x = std::stoull(v, &used);
    if (used != v.size()) syntax(line, "not an integer: '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    syntax(line, "not an integer: '" + v + "'");
  }
}

std::uint32_t to_u32(const std::string& v, std::size_t line) {
  auto x = to_u64(v, line);
  if (x > 0xffffffffULL) syntax(line, "value out of range: " + v);
  return static_cast<std::uint32_t>(x);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

void set_param(Scenario& s, const std::string& key, const std::string& value, std::size_t line) {
  auto u32 = [&] { return to_u32(value, line); };
  if (key == "name") s.name = value;
  else if (key == "clients") s.n_clients = u32();
  else if (key == "group_size") s.group_size = u32();
  else if (key == "relays") s.relays = u32();
  else if (key == "workers") s.workers = u32();
  else if (key == "epochs") s.epochs = u32();
  else if (key == "rounds") s.schedule.rounds = u32();
  else if (key == "round_ms") s.schedule.round_ms = u32();
  else if (key == "snippet_ms") s.schedule.snippet_ms = u32();
  else if (key == "dial_ms") s.schedule.dial_ms = u32();
  else if (key == "collect_ms") s.schedule.collect_ms = u32();
  else if (key == "bitrate_bps") s.schedule.bitrate_bps = u32();
  else if (key == "simulated_users") s.simulated_users = u32();
  else if (key == "seed") s.seed = to_u64(value, line);
  else if (key == "worker_threads") s.worker_threads = u32();
  else if (key == "worker_min_round_ms") s.worker_min_round_ms = u32();
  else if (key == "he_n") s.he.n = u32();
  else if (key == "he_log_q") s.he.log_q = u32();
  else if (key == "he_plain_bits") s.he.plain_bits = u32();
  else if (key == "he_pk_rows") s.he.pk_rows = u32();
  else if (key == "mix") {
    if (value == "pcm") s.mix = client::MixMode::Pcm;
    else if (value == "records") s.mix = client::MixMode::Records;
    else syntax(line, "mix must be pcm or records");
  } else {
    syntax(line, "unknown parameter '" + key + "'");
  }
}

}  // namespace

void Scenario::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::ScenarioSyntax, what); };
  if (n_clients == 0) bad("scenario needs at least one client");
  if (relays == 0 || workers == 0) bad("need at least one relay and one worker");
  if (group_size < 2) bad("group_size must be at least 2");
  if (epochs == 0 || schedule.rounds == 0) bad("need at least one epoch and one round");
  if (schedule.round_ms < schedule.snippet_ms) bad("round_ms must be at least snippet_ms");
  if (intents.size() > epochs) bad("more [epochs] entries than epochs");
  std::set<std::string> ids;
  for (const auto& [id, members] : groups) {
    if (!ids.insert(id).second) bad("group '" + id + "' declared twice");
    if (members.size() < 2) bad("group '" + id + "' needs two members");
    std::set<std::uint32_t> uniq(members.begin(), members.end());
    if (uniq.size() != members.size()) bad("group '" + id + "' repeats a member");
    for (auto m : members) {
      if (m < 1 || m > n_clients) bad("group '" + id + "' names unknown client " + std::to_string(m));
    }
  }
  for (auto c : silent) {
    if (c < 1 || c > n_clients) bad("silent client out of range");
  }
  for (std::size_t e = 0; e < intents.size(); ++e) {
    for (const auto& [c, intent] : intents[e]) {
      if (c < 1 || c > n_clients) bad("epoch " + std::to_string(e + 1) + " names unknown client");
      if (!intent.dial) continue;
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == *intent.dial; });
      if (it == groups.end()) bad("epoch " + std::to_string(e + 1) + " dials undeclared group " + *intent.dial);
      if (std::find(it->second.begin(), it->second.end(), c) == it->second.end()) {
        bad("client " + std::to_string(c) + " dials group " + *intent.dial + " it is not in");
      }
    }
  }
}

dialing::PublicKey Scenario::identity(std::uint32_t client) const {
  Writer w;
  w.raw(as_bytes("pirates/identity")).u64(seed).u32(client);
  dialing::PublicKey pk;
  pk.bytes = crypto::hash(w.bytes()).bytes;
  return pk;
}

crypto::GroupMasterKey Scenario::gmk(const std::string& group) const {
  Writer w;
  w.raw(as_bytes("pirates/gmk")).u64(seed).blob(as_bytes(group));
  crypto::GroupMasterKey k;
  k.bytes = crypto::hash(w.bytes()).bytes;
  return k;
}

std::vector<dialing::GroupDescriptor> Scenario::groups_of(std::uint32_t client) const {
  std::vector<dialing::GroupDescriptor> out;
  for (const auto& [id, members] : groups) {
    auto it = std::find(members.begin(), members.end(), client);
    if (it == members.end()) continue;
    dialing::GroupDescriptor g;
    g.id = id;
    g.gmk = gmk(id);
    for (auto m : members) g.members.push_back(identity(m));
    g.my_index = static_cast<std::size_t>(it - members.begin());
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<client::EpochIntent> Scenario::plan_of(std::uint32_t client) const {
  std::vector<client::EpochIntent> plan(epochs);
  for (std::size_t e = 0; e < intents.size(); ++e) {
    auto it = intents[e].find(client);
    if (it != intents[e].end()) plan[e] = it->second;
  }
  if (silent.contains(client)) {
    for (auto& p : plan) p.silent = true;
  }
  return plan;
}

std::string Scenario::plan_string(std::uint32_t client) const {
  std::string out;
  for (const auto& p : plan_of(client)) {
    if (!out.empty()) out += ",";
    if (p.silent) {
      out += "!";
    } else if (p.dial) {
      out += *p.dial;
      if (p.hangup_after) out += "/" + std::to_string(p.hangup_after);
    } else {
      out += "-";
    }
  }
  return out;
}

std::uint32_t Scenario::n_buckets() const { return mapping::n_buckets_for(group_size); }

std::uint64_t Scenario::server_seed(wire::Role role, std::uint32_t index) const {
  return seed * 1000003ULL + 100 * (static_cast<std::uint64_t>(role) + 1) + index;
}

std::uint64_t Scenario::client_seed(std::uint32_t client) const {
  return seed * 1000003ULL + 100000 + client;
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  std::map<std::uint32_t, std::map<std::uint32_t, client::EpochIntent>> by_epoch;
  while (std::getline(is, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') syntax(line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "params" && section != "groups" && section != "clients" && section != "epochs") {
        syntax(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) syntax(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) syntax(line_no, "entry outside any section");
    if (section == "params") {
      set_param(s, key, value, line_no);
    } else if (section == "groups") {
      std::vector<std::uint32_t> members;
      for (const auto& w : words(value)) members.push_back(to_u32(w, line_no));
      s.groups.emplace_back(key, std::move(members));
    } else if (section == "clients") {
      if (key == "count") {
        s.n_clients = to_u32(value, line_no);
      } else if (key == "silent") {
        for (const auto& w : words(value)) s.silent.insert(to_u32(w, line_no));
      } else {
        syntax(line_no, "unknown [clients] key '" + key + "'");
      }
    } else if (section == "epochs") {
      const auto e = to_u32(key, line_no);
      if (e == 0) syntax(line_no, "epochs are numbered from 1");
      auto& slot = by_epoch[e];
      for (const auto& w : words(value)) {
        const auto colon = w.find(':');
        if (colon == std::string::npos) syntax(line_no, "expected client:group[/round], got '" + w + "'");
        const auto c = to_u32(w.substr(0, colon), line_no);
        auto plan = client::parse_plan(w.substr(colon + 1));
        if (plan.size() != 1) syntax(line_no, "bad intent '" + w + "'");
        if (!slot.emplace(c, plan.front()).second) {
          syntax(line_no, "client " + std::to_string(c) + " has two intents in epoch " + std::to_string(e));
        }
      }
    }
  }
  for (const auto& [e, m] : by_epoch) {
    if (e > s.intents.size()) s.intents.resize(e);
    s.intents[e - 1] = m;
  }
  if (s.intents.size() > s.epochs) s.epochs = static_cast<std::uint32_t>(s.intents.size());
  s.intents.resize(s.epochs);
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto s = parse_scenario(ss.str());
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "[params]\n";
  os << "name = " << s.name << "\n";
  os << "group_size = " << s.group_size << "\n";
  os << "relays = " << s.relays << "\nworkers = " << s.workers << "\n";
  os << "epochs = " << s.epochs << "\nrounds = " << s.schedule.rounds << "\n";
  os << "round_ms = " << s.schedule.round_ms << "\nsnippet_ms = " << s.schedule.snippet_ms << "\n";
  os << "dial_ms = " << s.schedule.dial_ms << "\ncollect_ms = " << s.schedule.collect_ms << "\n";
  os << "bitrate_bps = " << s.schedule.bitrate_bps << "\n";
  os << "simulated_users = " << s.simulated_users << "\nseed = " << s.seed << "\n";
  os << "worker_threads = " << s.worker_threads << "\n";
  os << "worker_min_round_ms = " << s.worker_min_round_ms << "\n";
  os << "mix = " << (s.mix == client::MixMode::Pcm ? "pcm" : "records") << "\n";
  os << "he_n = " << s.he.n << "\nhe_log_q = " << s.he.log_q << "\nhe_plain_bits = " << s.he.plain_bits
     << "\nhe_pk_rows = " << s.he.pk_rows << "\n";
  os << "\n[groups]\n";
  for (const auto& [id, members] : s.groups) {
    os << id << " =";
    for (auto m : members) os << " " << m;
    os << "\n";
  }
  os << "\n[clients]\ncount = " << s.n_clients << "\n";
  if (!s.silent.empty()) {
    os << "silent =";
    for (auto c : s.silent) os << " " << c;
    os << "\n";
  }
  os << "\n[epochs]\n";
  for (std::size_t e = 0; e < s.intents.size(); ++e) {
    os << e + 1 << " =";
    for (const auto& [c, intent] : s.intents[e]) {
      if (!intent.dial) continue;
      os << " " << c << ":" << *intent.dial;
      if (intent.hangup_after) os << "/" << intent.hangup_after;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace pirates::testbed
