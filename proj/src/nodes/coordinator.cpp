#include "pirates/nodes/coordinator.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::nodes {

using wire::PhaseCode;

namespace {

Rng make_rng(const std::optional<std::uint64_t>& seed) {
  return seed ? Rng(*seed) : Rng::from_os();
}

}  // namespace

Coordinator::Coordinator(CoordinatorConfig config, const Clock& clock, Recorder& recorder)
    : cfg_(std::move(config)), clock_(clock), rec_(recorder), rng_(make_rng(cfg_.seed)) {
  if (cfg_.n_relays == 0 || cfg_.n_workers == 0) {
    throw Error(ErrorCode::InvalidArgument, "need at least one relay and one worker");
  }
  if (cfg_.schedule.round_ms < cfg_.schedule.snippet_ms) {
    throw Error(ErrorCode::InvalidArgument, "round_ms must be at least snippet_ms");
  }
  if (cfg_.schedule.rounds == 0 || cfg_.epochs == 0) {
    throw Error(ErrorCode::InvalidArgument, "need at least one epoch and one round");
  }
  cfg_.he.validate();
  n_buckets_ = mapping::n_buckets_for(cfg_.group_size);
}

bool Coordinator::servers_ready() const {
  return relays_.size() == cfg_.n_relays && workers_.size() == cfg_.n_workers;
}

wire::RegInfo Coordinator::register_client(const wire::Hello& hello) {
  if (state_ != State::Registration) throw Error(ErrorCode::RegistrationClosed, "epoch in progress");
  if (!servers_ready()) throw Error(ErrorCode::InvalidArgument, "servers not registered yet");
  ClientSlot slot;
  slot.hello = hello;
  rng_.fill(slot.token);
  const auto n = static_cast<std::uint32_t>(clients_.size());
  slot.relay = n % cfg_.n_relays;
  slot.worker = n % cfg_.n_workers;
  clients_.push_back(slot);

  wire::RegInfo info;
  info.role = Role::Client;
  info.index = n + 1;
  info.token = slot.token;
  info.relay_index = slot.relay;
  info.relay = relays_[slot.relay].listen;
  info.worker_index = slot.worker;
  info.worker = workers_[slot.worker].listen;
  info.n_mailboxes = n + 1;
  return info;
}

void Coordinator::on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  using wire::MessageType;
  switch (frame.type) {
    case MessageType::Hello:
      on_hello(from, wire::parse<wire::Hello>(frame), out);
      break;
    case MessageType::InviteBroadcast: {
      auto msg = wire::parse<wire::InviteBroadcast>(frame);
      if (state_ != State::Dialing || msg.epoch != epoch_) {
        rec_.event("stale_invite_broadcast", from.str());
        break;
      }
      broadcast(frame, false, false, true, out);
      break;
    }
    case MessageType::PhaseAnnounce: {
      auto msg = wire::parse<wire::PhaseAnnounce>(frame);
      if (from.role != Role::Worker || msg.epoch != epoch_) break;
      if (msg.code == PhaseCode::DialDone && state_ == State::Dialing) {
        reported_.insert(from.index);
        if (reported_.size() == cfg_.n_workers) start_round(1, out);
      } else if (msg.code == PhaseCode::RoundDone && state_ == State::RoundActive && msg.round == round_) {
        reported_.insert(from.index);
        if (reported_.size() == cfg_.n_workers) round_complete(out);
      }
      break;
    }
    default:
      rec_.event("unexpected_frame", std::string(wire::to_string(frame.type)) + " from " + from.str());
  }
}

void Coordinator::on_hello(const PeerId& from, const wire::Hello& hello, Outbox& out) {
  if (hello.role == Role::Relay || hello.role == Role::Worker) {
    auto& slots = hello.role == Role::Relay ? relays_ : workers_;
    const std::uint32_t limit = hello.role == Role::Relay ? cfg_.n_relays : cfg_.n_workers;
    if (slots.size() >= limit || state_ != State::Registration) {
      rec_.event("server_rejected", from.str());
      return;
    }
    const auto index = static_cast<std::uint32_t>(slots.size());
    slots.push_back({hello.listen});
    out.rebind(from, {hello.role, index});
    if (!servers_ready()) return;

    servers_ready_at_ = clock_.now_us();
    std::vector<wire::Endpoint> worker_eps;
    for (const auto& w : workers_) worker_eps.push_back(w.listen);
    for (std::uint32_t i = 0; i < cfg_.n_workers; ++i) {
      wire::RegInfo info;
      info.role = Role::Worker;
      info.index = i;
      out.send({Role::Worker, i}, wire::make_frame(info));
    }
    for (std::uint32_t i = 0; i < cfg_.n_relays; ++i) {
      wire::RegInfo info;
      info.role = Role::Relay;
      info.index = i;
      info.workers = worker_eps;
      out.send({Role::Relay, i}, wire::make_frame(info));
    }
    auto queued = std::move(queued_);
    queued_.clear();
    for (const auto& [peer, h] : queued) admit_client(peer, h, out);
    maybe_start_epoch(out);
    return;
  }
  if (hello.role != Role::Client) return;
  if (!servers_ready() && state_ == State::Registration) {
    queued_.emplace_back(from, hello);
    return;
  }
  admit_client(from, hello, out);
  maybe_start_epoch(out);
}

void Coordinator::admit_client(const PeerId& from, const wire::Hello& hello, Outbox& out) {
  wire::RegInfo info;
  try {
    info = register_client(hello);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RegistrationClosed) throw;
    rec_.event("registration_closed", from.str());
    wire::RegInfo reject;
    reject.role = Role::Client;
    reject.index = 0;
    out.send(from, wire::make_frame(reject));
    return;
  }
  const PeerId client{Role::Client, info.index};
  out.rebind(from, client);
  auto frame = wire::make_frame(info);
  out.send({Role::Relay, info.relay_index}, frame);
  out.send({Role::Worker, info.worker_index}, frame);
  out.send(client, std::move(frame));
}

void Coordinator::maybe_start_epoch(Outbox& out) {
  if (state_ != State::Registration || !servers_ready() || clients_.empty()) return;
  if (cfg_.expected_clients > 0) {
    if (clients_.size() >= cfg_.expected_clients) start_epoch(out);
    return;
  }
  if (clock_.now_us() >= *servers_ready_at_ + std::int64_t{cfg_.register_ms} * 1000) start_epoch(out);
}

wire::PhaseAnnounce Coordinator::announce(PhaseCode code) const {
  wire::PhaseAnnounce a;
  a.code = code;
  a.epoch = epoch_;
  a.round = round_;
  a.seed = seed_;
  a.n_mailboxes = static_cast<std::uint32_t>(clients_.size());
  a.n_buckets = n_buckets_;
  a.n_relays = cfg_.n_relays;
  a.n_workers = cfg_.n_workers;
  a.simulated_users = cfg_.simulated_users;
  a.group_size = cfg_.group_size;
  a.schedule = cfg_.schedule;
  a.he = cfg_.he;
  a.timestamp_us = wall_us();
  return a;
}

void Coordinator::broadcast(const wire::Frame& frame, bool relays, bool workers, bool clients,
                            Outbox& out) const {
  if (relays) {
    for (std::uint32_t i = 0; i < cfg_.n_relays; ++i) out.send({Role::Relay, i}, frame);
  }
  if (workers) {
    for (std::uint32_t i = 0; i < cfg_.n_workers; ++i) out.send({Role::Worker, i}, frame);
  }
  if (clients) {
    for (std::uint32_t m = 1; m <= clients_.size(); ++m) out.send({Role::Client, m}, frame);
  }
}

void Coordinator::start_epoch(Outbox& out) {
  ++epoch_;
  round_ = 0;
  rng_.fill(seed_.bytes);
  const auto n = static_cast<std::uint32_t>(clients_.size());
  mapping_ = mapping::build_mapping(n, n_buckets_, seed_);
  mapping_.add_simulated_users(cfg_.simulated_users);
  rec_.event("epoch_start", std::to_string(epoch_));

  wire::BucketLists lists;
  lists.epoch = epoch_;
  lists.n_mailboxes = n;
  lists.n_simulated = mapping_.n_simulated();
  lists.lists = mapping_.bucket_lists();
  broadcast(wire::make_frame(lists), false, true, false, out);

  wire::Directory dir;
  dir.epoch = epoch_;
  for (std::uint32_t m = 1; m <= n; ++m) dir.entries.push_back({clients_[m - 1].hello.identity, m});
  broadcast(wire::make_frame(dir), false, false, true, out);

  broadcast(wire::make_frame(announce(PhaseCode::EpochStart)), true, true, true, out);
  state_ = State::Dialing;
  reported_.clear();
  phase_started_ = clock_.now_us();
  timer_ = phase_started_ + std::int64_t{cfg_.schedule.dial_ms} * 3000;
}

void Coordinator::start_round(std::uint32_t round, Outbox& out) {
  round_ = round;
  state_ = State::RoundActive;
  reported_.clear();
  phase_started_ = clock_.now_us();
  timer_ = phase_started_ + std::int64_t{cfg_.round_timeout_ms} * 1000;
  rec_.timing("round_start", epoch_, round_, 0, wall_us());
  broadcast(wire::make_frame(announce(PhaseCode::RoundStart)), true, true, true, out);
}

void Coordinator::round_complete(Outbox& out) {
  rec_.timing("round_done", epoch_, round_, 0, wall_us());
  state_ = State::Pacing;
  timer_ = phase_started_ + std::int64_t{cfg_.schedule.round_ms} * 1000;
  if (clock_.now_us() >= timer_) on_deadline(out);
}

void Coordinator::shutdown(Outbox& out) {
  broadcast(wire::make_frame(announce(PhaseCode::Shutdown)), true, true, true, out);
  state_ = State::Done;
}

std::optional<std::int64_t> Coordinator::deadline() const {
  switch (state_) {
    case State::Registration:
      if (cfg_.expected_clients == 0 && servers_ready_at_) {
        return *servers_ready_at_ + std::int64_t{cfg_.register_ms} * 1000;
      }
      return std::nullopt;
    case State::Dialing:
    case State::RoundActive:
    case State::Pacing: return timer_;
    case State::Done: return std::nullopt;
  }
  return std::nullopt;
}

void Coordinator::on_deadline(Outbox& out) {
  switch (state_) {
    case State::Registration:
      if (clients_.empty()) {
        // Keep the window open until someone shows up.
        servers_ready_at_ = clock_.now_us();
        return;
      }
      maybe_start_epoch(out);
      return;
    case State::Dialing:
      rec_.event("deadline_overrun", "dialing epoch " + std::to_string(epoch_));
      start_round(1, out);
      return;
    case State::RoundActive:
      rec_.event("deadline_overrun", "round " + std::to_string(round_));
      round_complete(out);
      return;
    case State::Pacing:
      if (round_ < cfg_.schedule.rounds) {
        start_round(round_ + 1, out);
      } else if (epoch_ < cfg_.epochs) {
        start_epoch(out);
      } else {
        shutdown(out);
      }
      return;
    case State::Done: return;
  }
}

}  // namespace pirates::nodes
