#include "pirates/nodes/relay.hpp"

#include <algorithm>

#include "pirates/common/errors.hpp"
#include "pirates/crypto/sym.hpp"
#include "pirates/dialing/invite.hpp"
#include "pirates/wire/snippet.hpp"

namespace pirates::nodes {

using wire::MessageType;
using wire::PhaseCode;

Relay::Relay(RelayConfig config, const Clock& clock, Recorder& recorder, std::uint32_t pending_tag)
    : cfg_(std::move(config)),
      clock_(clock),
      rec_(recorder),
      rng_(cfg_.seed ? Rng(*cfg_.seed) : Rng::from_os()),
      self_(PeerId::pending(Role::Relay, pending_tag)) {}

void Relay::start(Outbox& out) {
  out.connect(PeerId::coordinator(), cfg_.coordinator);
  wire::Hello hello;
  hello.role = Role::Relay;
  hello.listen = cfg_.listen;
  out.send(PeerId::coordinator(), wire::make_frame(hello));
}

void Relay::add_client(std::uint32_t mailbox, const wire::Token& token) { clients_[mailbox] = token; }

void Relay::begin_epoch(const wire::PhaseAnnounce& a) {
  epoch_info_ = a;
  ct_size_ = crypto::SymCipher(wire::snippet_capacity(a.schedule.snippet_ms, a.schedule.bitrate_bps))
                 .ciphertext_size();
  mapping_ = mapping::build_mapping(a.n_mailboxes, a.n_buckets, a.seed);
  mapping_.add_simulated_users(a.simulated_users);
  owned_simulated_.clear();
  for (std::uint32_t v = a.n_mailboxes + 1; v <= a.n_mailboxes + mapping_.n_simulated(); ++v) {
    if (clients_.contains(mapping_.duplicate_source(v))) owned_simulated_.push_back(v);
  }
  invites_.clear();
  snippets_.clear();
  round_ = 0;
  stage_ = Stage::Invites;
  timer_ = clock_.now_us() + std::int64_t{a.schedule.dial_ms} * 1000;
}

void Relay::accept_invite(const wire::InviteSubmit& s) {
  auto it = clients_.find(s.mailbox_id);
  if (it == clients_.end()) throw Error(ErrorCode::UnknownClient, "mailbox " + std::to_string(s.mailbox_id));
  if (it->second != s.token) throw Error(ErrorCode::BadToken, "mailbox " + std::to_string(s.mailbox_id));
  invites_[s.mailbox_id] = s.invite;
}

void Relay::accept_snippet(std::uint64_t epoch, std::uint32_t round, std::uint32_t mailbox,
                           const wire::Token& token, ByteView ciphertext) {
  auto it = clients_.find(mailbox);
  if (it == clients_.end()) throw Error(ErrorCode::UnknownClient, "mailbox " + std::to_string(mailbox));
  if (it->second != token) throw Error(ErrorCode::BadToken, "mailbox " + std::to_string(mailbox));
  if (!epoch_info_ || epoch != epoch_info_->epoch) {
    throw Error(ErrorCode::PhaseMissed, "snippet for epoch " + std::to_string(epoch));
  }
  if (ciphertext.size() != ct_size_) {
    throw Error(ErrorCode::WrongSize, std::to_string(ciphertext.size()) + " != " + std::to_string(ct_size_));
  }
  snippets_[round][mailbox].assign(ciphertext.begin(), ciphertext.end());
}

wire::InviteBroadcast Relay::collect_invites() {
  wire::InviteBroadcast b;
  b.epoch = epoch_info_ ? epoch_info_->epoch : 0;
  b.relay_index = self_.index;
  for (const auto& [mailbox, token] : clients_) {
    auto it = invites_.find(mailbox);
    if (it != invites_.end()) {
      b.invites.push_back(it->second);
    } else {
      b.invites.push_back(dialing::make_cover_invite(rng_));
      rec_.event("cover_invite_substituted", std::to_string(mailbox));
    }
  }
  return b;
}

wire::MailboxBroadcast Relay::broadcast_mailboxes(std::uint32_t round) {
  wire::MailboxBroadcast b;
  b.epoch = epoch_info_ ? epoch_info_->epoch : 0;
  b.round = round;
  b.relay_index = self_.index;
  auto& slots = snippets_[round];
  std::map<std::uint32_t, const Bytes*> content;
  for (const auto& [mailbox, token] : clients_) {
    auto it = slots.find(mailbox);
    if (it == slots.end()) {
      it = slots.emplace(mailbox, rng_.bytes(ct_size_)).first;
      rec_.event("random_record_substituted", std::to_string(mailbox));
    }
    b.records.push_back({mailbox, it->second});
  }
  for (auto v : owned_simulated_) b.records.push_back({v, slots.at(mapping_.duplicate_source(v))});
  snippets_.erase(round);
  return b;
}

void Relay::on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  if (!try_handle(from, frame, out)) {
    deferred_.emplace_back(from, frame);
    return;
  }
  drain_deferred(out);
}

void Relay::drain_deferred(Outbox& out) {
  bool progress = true;
  while (progress && !deferred_.empty()) {
    progress = false;
    auto pending = std::move(deferred_);
    deferred_.clear();
    for (auto& [from, frame] : pending) {
      if (try_handle(from, frame, out)) {
        progress = true;
      } else {
        deferred_.emplace_back(from, std::move(frame));
      }
    }
  }
}

// Returns false when the frame refers to state not yet known (an epoch not
// yet announced or a client not yet forwarded), so it is retried later.
bool Relay::try_handle(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  switch (frame.type) {
    case MessageType::RegInfo: {
      auto info = wire::parse<wire::RegInfo>(frame);
      if (info.role == Role::Relay) {
        self_ = {Role::Relay, info.index};
        workers_ = info.workers;
        for (std::uint32_t j = 0; j < workers_.size(); ++j) {
          out.connect({Role::Worker, j}, workers_[j]);
          wire::Hello hello;
          hello.role = Role::Relay;
          hello.index = self_.index;
          hello.listen = cfg_.listen;
          out.send({Role::Worker, j}, wire::make_frame(hello));
        }
      } else if (info.role == Role::Client) {
        add_client(info.index, info.token);
      }
      return true;
    }
    case MessageType::Hello:
      return true;
    case MessageType::PhaseAnnounce: {
      auto a = wire::parse<wire::PhaseAnnounce>(frame);
      if (a.code == PhaseCode::EpochStart) {
        begin_epoch(a);
        maybe_flush(out, false);
      } else if (a.code == PhaseCode::RoundStart) {
        if (!epoch_info_ || a.epoch != epoch_info_->epoch) return false;
        if (stage_ == Stage::Invites) maybe_flush(out, true);
        round_ = a.round;
        stage_ = Stage::Snippets;
        timer_ = clock_.now_us() + std::int64_t{epoch_info_->schedule.collect_ms} * 1000;
        maybe_flush(out, false);
      } else if (a.code == PhaseCode::Shutdown) {
        stage_ = Stage::Done;
        finished_ = true;
      }
      return true;
    }
    case MessageType::InviteSubmit: {
      auto s = wire::parse<wire::InviteSubmit>(frame);
      if (!epoch_info_ || s.epoch > epoch_info_->epoch || !clients_.contains(s.mailbox_id)) return false;
      if (s.epoch < epoch_info_->epoch || stage_ != Stage::Invites) {
        rec_.event("late_invite", std::to_string(s.mailbox_id));
        return true;
      }
      try {
        accept_invite(s);
      } catch (const Error& e) {
        rec_.event("invite_rejected", e.what());
        return true;
      }
      maybe_flush(out, false);
      return true;
    }
    case MessageType::SnippetSubmit: {
      auto s = wire::parse<wire::SnippetSubmit>(frame);
      if (!epoch_info_ || s.epoch > epoch_info_->epoch || !clients_.contains(s.mailbox_id)) return false;
      const bool window_closed = s.round < round_ || (s.round == round_ && stage_ == Stage::SnippetsSent);
      if (s.epoch < epoch_info_->epoch || window_closed) {
        rec_.event("late_snippet", std::to_string(s.mailbox_id));
        return true;
      }
      try {
        accept_snippet(s.epoch, s.round, s.mailbox_id, s.token, s.ciphertext);
        rec_.timing("snippet_recv", s.epoch, s.round, s.mailbox_id, wall_us());
        rec_.timing("snippet_sent", s.epoch, s.round, s.mailbox_id, s.sent_us);
      } catch (const Error& e) {
        rec_.event("snippet_rejected", e.what());
        return true;
      }
      maybe_flush(out, false);
      return true;
    }
    default:
      rec_.event("unexpected_frame", std::string(wire::to_string(frame.type)) + " from " + from.str());
      return true;
  }
}

void Relay::maybe_flush(Outbox& out, bool forced) {
  if (stage_ == Stage::Invites) {
    if (!forced && invites_.size() < clients_.size()) return;
    out.send(PeerId::coordinator(), wire::make_frame(collect_invites()));
    stage_ = Stage::InvitesSent;
  } else if (stage_ == Stage::Snippets) {
    if (!forced && snippets_[round_].size() < clients_.size()) return;
    auto b = broadcast_mailboxes(round_);
    b.sent_us = wall_us();
    rec_.timing("broadcast_sent", b.epoch, b.round, self_.index, b.sent_us);
    auto frame = wire::make_frame(b);
    for (std::uint32_t j = 0; j < workers_.size(); ++j) out.send({Role::Worker, j}, frame);
    stage_ = Stage::SnippetsSent;
  }
}

std::optional<std::int64_t> Relay::deadline() const {
  if (stage_ == Stage::Invites || stage_ == Stage::Snippets) return timer_;
  return std::nullopt;
}

void Relay::on_deadline(Outbox& out) {
  if (stage_ == Stage::Invites || stage_ == Stage::Snippets) {
    rec_.event("window_closed", stage_ == Stage::Invites ? "invites" : "snippets");
    maybe_flush(out, true);
  }
}

}  // namespace pirates::nodes
