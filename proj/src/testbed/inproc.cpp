#include "pirates/testbed/inproc.hpp"

#include "pirates/client/client.hpp"
#include "pirates/common/errors.hpp"
#include "pirates/nodes/coordinator.hpp"
#include "pirates/nodes/relay.hpp"
#include "pirates/nodes/worker.hpp"

namespace pirates::testbed {

using nodes::Outbox;
using nodes::PeerId;
using wire::Role;

namespace {

std::pair<std::uint32_t, std::uint16_t> key(const wire::Endpoint& ep) {
  std::uint32_t ip = 0;
  for (auto b : ep.ip) ip = (ip << 8) | b;
  return {ip, ep.port};
}

wire::Endpoint local(std::uint16_t port) {
  wire::Endpoint ep;
  ep.ip = {127, 0, 0, 1};
  ep.port = port;
  return ep;
}

}  // namespace

void InProcessNetwork::add(std::string name, nodes::Node& node, nodes::Recorder& rec,
                           std::optional<wire::Endpoint> listen) {
  if (listen) endpoints_[key(*listen)] = slots_.size();
  Slot s;
  s.name = std::move(name);
  s.node = &node;
  s.rec = &rec;
  slots_.push_back(std::move(s));
}

void InProcessNetwork::apply(std::size_t from, Outbox& out) {
  auto& src = slots_[from];
  for (auto& action : out.actions()) {
    if (auto* c = std::get_if<Outbox::Connect>(&action)) {
      auto it = endpoints_.find(key(c->endpoint));
      if (it == endpoints_.end()) throw Error(ErrorCode::InvalidArgument, src.name + ": no node at " + c->endpoint.str());
      src.routes[c->peer] = it->second;
      src.labels[it->second] = c->peer;
    } else if (auto* r = std::get_if<Outbox::Rebind>(&action)) {
      auto it = src.routes.find(r->from);
      if (it == src.routes.end()) continue;
      const auto target = it->second;
      src.routes.erase(it);
      src.routes[r->to] = target;
      src.labels[target] = r->to;
    } else if (auto* s = std::get_if<Outbox::Send>(&action)) {
      auto it = src.routes.find(s->to);
      if (it == src.routes.end()) {
        src.rec->event("send_dropped", s->to.str());
        continue;
      }
      src.rec->frame(true, s->to, s->frame);
      queue_.push_back({from, it->second, std::move(s->frame)});
    }
  }
  out.clear();
}

void InProcessNetwork::deliver(Pending& p) {
  auto& dst = slots_[p.to];
  auto lit = dst.labels.find(p.from);
  PeerId label;
  if (lit == dst.labels.end()) {
    if (p.frame.type != wire::MessageType::Hello) {
      dst.rec->event("frame_before_hello", slots_[p.from].name);
      return;
    }
    const auto hello = wire::parse<wire::Hello>(p.frame);
    label = hello.index == wire::kUnassigned ? PeerId::pending(hello.role, next_conn_++) : PeerId{hello.role, hello.index};
    dst.labels[p.from] = label;
    dst.routes[label] = p.from;
  } else {
    label = lit->second;
  }
  dst.rec->frame(false, label, p.frame);
  Outbox out;
  dst.node->on_frame(label, p.frame, out);
  apply(p.to, out);
}

bool InProcessNetwork::run(std::uint64_t max_steps) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Outbox out;
    slots_[i].node->start(out);
    apply(i, out);
  }
  for (std::uint64_t step = 0; step < max_steps; ++step) {
    if (!queue_.empty()) {
      auto p = std::move(queue_.front());
      queue_.pop_front();
      if (slots_[p.to].node->finished()) continue;
      deliver(p);
      continue;
    }
    bool all_done = true;
    std::optional<std::size_t> next;
    std::int64_t when = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].node->finished()) continue;
      all_done = false;
      auto d = slots_[i].node->deadline();
      if (d && (!next || *d < when)) {
        next = i;
        when = *d;
      }
    }
    if (all_done) return true;
    if (!next) {
      problem_ = "stalled with no pending frames or deadlines";
      return false;
    }
    clock_.advance_to(when);
    Outbox out;
    slots_[*next].node->on_deadline(out);
    apply(*next, out);
  }
  problem_ = "step limit reached";
  return false;
}

RunResult run_scenario_inproc(const Scenario& s, const std::function<void(const InprocNodes&)>& inspect) {
  s.validate();
  VirtualClock clock;
  InProcessNetwork net(clock);

  const auto coord_ep = local(1000);
  nodes::CoordinatorConfig cc;
  cc.n_relays = s.relays;
  cc.n_workers = s.workers;
  cc.group_size = s.group_size;
  cc.expected_clients = s.n_clients;
  cc.epochs = s.epochs;
  cc.simulated_users = s.simulated_users;
  cc.schedule = s.schedule;
  cc.he = s.he;
  cc.seed = s.coordinator_seed();

  std::vector<std::unique_ptr<nodes::Recorder>> recs;
  std::vector<std::unique_ptr<nodes::Node>> owned;
  std::vector<NodeLog> logs;
  auto make_rec = [&](std::string name, Role role, std::uint32_t index, std::uint32_t client) {
    recs.push_back(std::make_unique<nodes::Recorder>());
    NodeLog l;
    l.name = std::move(name);
    l.role = role;
    l.index = index;
    l.client = client;
    logs.push_back(std::move(l));
    return recs.back().get();
  };

  InprocNodes view;
  auto* rec = make_rec("coordinator", Role::Coordinator, 0, 0);
  owned.push_back(std::make_unique<nodes::Coordinator>(cc, clock, *rec));
  view.coordinator = static_cast<nodes::Coordinator*>(owned.back().get());
  net.add("coordinator", *owned.back(), *rec, coord_ep);

  for (std::uint32_t i = 0; i < s.relays; ++i) {
    nodes::RelayConfig rc;
    rc.coordinator = coord_ep;
    rc.listen = local(static_cast<std::uint16_t>(2000 + i));
    rc.seed = s.server_seed(Role::Relay, i);
    auto name = "relay-" + std::to_string(i);
    rec = make_rec(name, Role::Relay, i, 0);
    owned.push_back(std::make_unique<nodes::Relay>(rc, clock, *rec, i));
    view.relays.push_back(static_cast<nodes::Relay*>(owned.back().get()));
    net.add(name, *owned.back(), *rec, rc.listen);
  }
  for (std::uint32_t i = 0; i < s.workers; ++i) {
    nodes::WorkerConfig wc;
    wc.coordinator = coord_ep;
    wc.listen = local(static_cast<std::uint16_t>(3000 + i));
    wc.threads = s.worker_threads;
    wc.min_round_ms = s.worker_min_round_ms;
    wc.seed = s.server_seed(Role::Worker, i);
    auto name = "worker-" + std::to_string(i);
    rec = make_rec(name, Role::Worker, i, 0);
    owned.push_back(std::make_unique<nodes::Worker>(wc, clock, *rec, i));
    view.workers.push_back(static_cast<nodes::Worker*>(owned.back().get()));
    net.add(name, *owned.back(), *rec, wc.listen);
  }
  for (std::uint32_t c = 1; c <= s.n_clients; ++c) {
    client::ClientConfig cfg;
    cfg.coordinator = coord_ep;
    cfg.identity = s.identity(c);
    cfg.groups = s.groups_of(c);
    cfg.plan = s.plan_of(c);
    cfg.mix = s.mix;
    cfg.seed = s.client_seed(c);
    auto name = "client-" + std::to_string(c);
    rec = make_rec(name, Role::Client, c, c);
    owned.push_back(std::make_unique<client::Client>(cfg, clock, *rec, c));
    view.clients.push_back(static_cast<client::Client*>(owned.back().get()));
    net.add(name, *owned.back(), *rec, std::nullopt);
  }

  RunResult run;
  run.scenario = s;
  run.completed = net.run();
  if (!run.completed) run.problems.push_back(net.problem());
  if (inspect) inspect(view);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    logs[i].rec = std::move(*recs[i]);
    if (logs[i].role == Role::Client) {
      for (const auto& ev : logs[i].rec.events) {
        if (ev.name == "registered") logs[i].index = static_cast<std::uint32_t>(std::stoul(ev.detail));
      }
    }
    run.nodes.push_back(std::move(logs[i]));
  }
  return run;
}

}  // namespace pirates::testbed
