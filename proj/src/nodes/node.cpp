#include "pirates/nodes/node.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::nodes {

using nlohmann::json;

std::string PeerId::str() const {
  std::string s = wire::to_string(role);
  if (role == Role::Coordinator) return s;
  if (is_pending()) return s + ":pending" + std::to_string(index & ~kPendingBit);
  return s + ":" + std::to_string(index);
}

std::int64_t SteadyClock::now_us() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::int64_t wall_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Registration: return "registration";
    case Phase::Mapping: return "mapping";
    case Phase::Dialing: return "dialing";
    case Phase::Communication: return "communication";
    case Phase::Teardown: return "teardown";
  }
  return "unknown";
}

Phase phase_of(const wire::Frame& frame) {
  using wire::MessageType;
  switch (frame.type) {
    case MessageType::Hello:
    case MessageType::RegInfo: return Phase::Registration;
    case MessageType::BucketLists:
    case MessageType::Directory: return Phase::Mapping;
    case MessageType::InviteSubmit:
    case MessageType::InviteBroadcast:
    case MessageType::QuerySubmit: return Phase::Dialing;
    case MessageType::SnippetSubmit:
    case MessageType::MailboxBroadcast:
    case MessageType::AnswerSet: return Phase::Communication;
    case MessageType::PhaseAnnounce: {
      // The code byte leads the payload.
      const auto code = frame.payload.empty() ? 0 : frame.payload[0];
      switch (static_cast<wire::PhaseCode>(code)) {
        case wire::PhaseCode::EpochStart: return Phase::Mapping;
        case wire::PhaseCode::DialDone: return Phase::Dialing;
        case wire::PhaseCode::RoundStart:
        case wire::PhaseCode::RoundDone: return Phase::Communication;
        case wire::PhaseCode::Shutdown: return Phase::Teardown;
      }
      return Phase::Teardown;
    }
  }
  return Phase::Teardown;
}

void Recorder::frame(bool outgoing, const PeerId& peer, const wire::Frame& f) {
  frames.push_back({outgoing, peer, f.type, phase_of(f), f.wire_size()});
}

void Recorder::timing(std::string name, std::uint64_t epoch, std::uint32_t round, std::uint32_t subject,
                      std::int64_t value) {
  timings.push_back({std::move(name), epoch, round, subject, value});
}

namespace {

Role role_from(const std::string& s) {
  for (auto r : {Role::Coordinator, Role::Relay, Role::Worker, Role::Client}) {
    if (s == wire::to_string(r)) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "role '" + s + "'");
}

wire::MessageType type_from(const std::string& s) {
  for (std::uint8_t t = 1; t <= 11; ++t) {
    if (s == wire::to_string(static_cast<wire::MessageType>(t))) return static_cast<wire::MessageType>(t);
  }
  throw Error(ErrorCode::UnknownType, "type '" + s + "'");
}

Phase phase_from(const std::string& s) {
  for (auto p : {Phase::Registration, Phase::Mapping, Phase::Dialing, Phase::Communication,
                 Phase::Teardown}) {
    if (s == to_string(p)) return p;
  }
  throw Error(ErrorCode::InvalidArgument, "phase '" + s + "'");
}

}  // namespace

std::string Recorder::to_jsonl(const std::string& node_name) const {
  std::ostringstream os;
  os << json{{"kind", "node"}, {"name", node_name}}.dump() << '\n';
  for (const auto& f : frames) {
    os << json{{"kind", "frame"},
               {"dir", f.outgoing ? "out" : "in"},
               {"peer_role", wire::to_string(f.peer.role)},
               {"peer_index", f.peer.index},
               {"type", wire::to_string(f.type)},
               {"phase", to_string(f.phase)},
               {"size", f.size}}
              .dump()
       << '\n';
  }
  for (const auto& t : timings) {
    os << json{{"kind", "timing"}, {"name", t.name},       {"epoch", t.epoch},
               {"round", t.round}, {"subject", t.subject}, {"value", t.value}}
              .dump()
       << '\n';
  }
  for (const auto& o : outputs) {
    os << json{{"kind", "output"},      {"epoch", o.epoch},   {"round", o.round},
               {"receiver", o.receiver}, {"sender", o.sender}, {"payload", to_hex(o.payload)}}
              .dump()
       << '\n';
  }
  for (const auto& d : decisions) {
    os << json{{"kind", "decision"},    {"epoch", d.epoch},
               {"client", d.client},    {"group", d.group},
               {"dialed", d.dialed},    {"all_random", d.all_random},
               {"targets", d.targets}}
              .dump()
       << '\n';
  }
  for (const auto& e : events) {
    os << json{{"kind", "event"}, {"name", e.name}, {"detail", e.detail}}.dump() << '\n';
  }
  return os.str();
}

void Recorder::write_jsonl(const std::string& path, const std::string& node_name) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << to_jsonl(node_name);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string Recorder::read_jsonl(const std::string& text, Recorder& into) {
  std::istringstream is(text);
  std::string line;
  std::string name;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoError, std::string("bad log line: ") + e.what());
    }
    const std::string kind = j.at("kind");
    if (kind == "node") {
      name = j.at("name");
    } else if (kind == "frame") {
      FrameRecord f;
      f.outgoing = j.at("dir") == "out";
      f.peer = {role_from(j.at("peer_role")), j.at("peer_index").get<std::uint32_t>()};
      f.type = type_from(j.at("type"));
      f.phase = phase_from(j.at("phase"));
      f.size = j.at("size");
      into.frames.push_back(f);
    } else if (kind == "timing") {
      into.timings.push_back({j.at("name"), j.at("epoch"), j.at("round"), j.at("subject"), j.at("value")});
    } else if (kind == "output") {
      into.outputs.push_back({j.at("epoch"), j.at("round"), j.at("receiver"), j.at("sender"),
                              from_hex(j.at("payload").get<std::string>())});
    } else if (kind == "decision") {
      DecisionRecord d;
      d.epoch = j.at("epoch");
      d.client = j.at("client");
      d.group = j.at("group");
      d.dialed = j.at("dialed");
      d.all_random = j.at("all_random");
      d.targets = j.at("targets").get<std::vector<std::uint32_t>>();
      into.decisions.push_back(std::move(d));
    } else if (kind == "event") {
      into.events.push_back({j.at("name"), j.at("detail")});
    }
  }
  return name;
}

}  // namespace pirates::nodes
