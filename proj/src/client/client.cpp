#include "pirates/client/client.hpp"

#include <algorithm>
#include <sstream>

#include "pirates/common/errors.hpp"
#include "pirates/wire/snippet.hpp"

namespace pirates::client {

using nodes::Role;
using nodes::wall_us;
using wire::MessageType;
using wire::PhaseCode;

namespace {

std::int64_t steady_us() { return nodes::SteadyClock().now_us(); }

}  // namespace

std::vector<EpochIntent> parse_plan(const std::string& text) {
  std::vector<EpochIntent> plan;
  if (text.empty()) return plan;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    EpochIntent intent;
    if (item == "!") {
      intent.silent = true;
    } else if (item != "-" && !item.empty()) {
      const auto slash = item.find('/');
      intent.dial = item.substr(0, slash);
      if (slash != std::string::npos) {
        try {
          intent.hangup_after = static_cast<std::uint32_t>(std::stoul(item.substr(slash + 1)));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument, "bad hangup round in '" + item + "'");
        }
      }
    }
    plan.push_back(intent);
  }
  return plan;
}

std::vector<dialing::GroupDescriptor> parse_group_file(const std::string& text,
                                                       const dialing::PublicKey& self) {
  std::vector<dialing::GroupDescriptor> groups;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string id, gmk;
    if (!(fields >> id)) continue;
    if (!(fields >> gmk)) throw Error(ErrorCode::InvalidArgument, "group '" + id + "' lacks a key");
    dialing::GroupDescriptor g;
    g.id = id;
    g.gmk.bytes = array_from_hex<32>(gmk);
    std::string member;
    bool found = false;
    while (fields >> member) {
      dialing::PublicKey pk;
      pk.bytes = array_from_hex<32>(member);
      if (pk == self) {
        g.my_index = g.members.size();
        found = true;
      }
      g.members.push_back(pk);
    }
    if (!found) throw Error(ErrorCode::InvalidArgument, "group '" + id + "' does not list this client");
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string format_group_file(const std::vector<dialing::GroupDescriptor>& groups) {
  std::string out;
  for (const auto& g : groups) {
    out += g.id + " " + to_hex(g.gmk.bytes);
    for (const auto& m : g.members) out += " " + to_hex(m.bytes);
    out += "\n";
  }
  return out;
}

Client::Client(ClientConfig config, const nodes::Clock& clock, nodes::Recorder& recorder,
               std::uint32_t pending_tag)
    : cfg_(std::move(config)),
      clock_(clock),
      rec_(recorder),
      rng_(cfg_.seed ? Rng(*cfg_.seed) : Rng::from_os()),
      self_(PeerId::pending(Role::Client, pending_tag)) {}

const EpochIntent& Client::intent(std::uint64_t epoch) const {
  static const EpochIntent idle;
  if (epoch == 0 || epoch > cfg_.plan.size()) return idle;
  return cfg_.plan[epoch - 1];
}

void Client::start(Outbox& out) {
  out.connect(PeerId::coordinator(), cfg_.coordinator);
  wire::Hello hello;
  hello.role = Role::Client;
  hello.identity = cfg_.identity;
  out.send(PeerId::coordinator(), wire::make_frame(hello));
}

void Client::on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) {
  if (held_ && frame.type != MessageType::AnswerSet) {
    deferred_.emplace_back(from, frame);
    return;
  }
  switch (frame.type) {
    case MessageType::RegInfo: {
      auto info = wire::parse<wire::RegInfo>(frame);
      if (info.index == 0) {
        rejected_ = true;
        finished_ = true;
        rec_.event("registration_rejected");
        return;
      }
      mailbox_ = info.index;
      token_ = info.token;
      self_ = {Role::Client, mailbox_};
      rec_.event("registered", std::to_string(mailbox_));
      relay_ = {Role::Relay, info.relay_index};
      worker_ = {Role::Worker, info.worker_index};
      wire::Hello hello;
      hello.role = Role::Client;
      hello.index = mailbox_;
      hello.token = token_;
      hello.identity = cfg_.identity;
      out.connect(relay_, info.relay);
      out.send(relay_, wire::make_frame(hello));
      out.connect(worker_, info.worker);
      out.send(worker_, wire::make_frame(hello));
      stage_ = Stage::Registered;
      return;
    }
    case MessageType::Directory:
      directory_ = wire::parse<wire::Directory>(frame);
      return;
    case MessageType::PhaseAnnounce: {
      auto a = wire::parse<wire::PhaseAnnounce>(frame);
      if ((a.code == PhaseCode::EpochStart || a.code == PhaseCode::Shutdown) && awaiting_answers()) {
        // Answers travel on the worker connection and can trail the
        // coordinator's announcement.
        held_ = a;
        hold_until_ = clock_.now_us() + std::int64_t{epoch_info_->schedule.collect_ms} * 1000;
        return;
      }
      on_announce(a, out);
      return;
    }
    case MessageType::InviteBroadcast: {
      auto b = wire::parse<wire::InviteBroadcast>(frame);
      if (stage_ != Stage::AwaitInvites || !epoch_info_ || b.epoch != epoch_info_->epoch) return;
      received_.insert(received_.end(), b.invites.begin(), b.invites.end());
      if (++broadcasts_seen_ == epoch_info_->n_relays) finish_dialing(out);
      return;
    }
    case MessageType::AnswerSet:
      on_answers(wire::AnswerSet::decode(frame.payload));
      if (held_ && !awaiting_answers()) release_held(out);
      return;
    default:
      rec_.event("unexpected_frame", std::string(wire::to_string(frame.type)) + " from " + from.str());
  }
}

bool Client::awaiting_answers() const {
  return epoch_info_ && stage_ == Stage::Querying && !intent(epoch_info_->epoch).silent &&
         answered_round_ < sent_round_;
}

void Client::on_announce(const wire::PhaseAnnounce& a, Outbox& out) {
  if (a.code == PhaseCode::EpochStart) {
    on_epoch_start(a, out);
  } else if (a.code == PhaseCode::RoundStart) {
    if (stage_ == Stage::AwaitInvites) {
      rec_.event("phase_missed", "no complete invite broadcast before round 1");
      finish_dialing(out);
    }
    run_round(a.round, out);
  } else if (a.code == PhaseCode::Shutdown) {
    stage_ = Stage::Done;
    finished_ = true;
  }
}

void Client::release_held(Outbox& out) {
  if (!held_) return;
  auto a = std::move(*held_);
  held_.reset();
  on_announce(a, out);
  auto pending = std::move(deferred_);
  deferred_.clear();
  for (auto& [from, frame] : pending) on_frame(from, frame, out);
}

void Client::on_epoch_start(const wire::PhaseAnnounce& a, Outbox& out) {
  epoch_info_ = a;
  sent_round_ = 0;
  answered_round_ = 0;
  received_.clear();
  broadcasts_seen_ = 0;
  decision_.reset();
  in_call_ = false;
  states_.clear();
  capacity_ = wire::snippet_capacity(a.schedule.snippet_ms, a.schedule.bitrate_bps);
  cipher_.emplace(capacity_);
  mapping_ = mapping::build_mapping(a.n_mailboxes, a.n_buckets, a.seed);
  mapping_.add_simulated_users(a.simulated_users);

  const auto& plan = intent(a.epoch);
  own_invite_ = dialing::make_cover_invite(rng_);
  if (plan.dial) {
    auto it = std::find_if(cfg_.groups.begin(), cfg_.groups.end(),
                           [&](const auto& g) { return g.id == *plan.dial; });
    if (it == cfg_.groups.end()) {
      rec_.event("unknown_group", *plan.dial);
    } else {
      own_invite_ = dialing::make_invite(it->gmk, it->self(), a.epoch);
    }
  }
  stage_ = Stage::AwaitInvites;
  timer_ = clock_.now_us() + std::int64_t{a.schedule.dial_ms} * 2000;
  if (plan.silent) return;
  wire::InviteSubmit submit{a.epoch, mailbox_, token_, own_invite_};
  out.send(relay_, wire::make_frame(submit));
}

void Client::finish_dialing(Outbox& out) {
  const auto& a = *epoch_info_;
  const auto& plan = intent(a.epoch);
  const auto t0 = steady_us();

  dialing::InviteSet set(received_);
  auto matches = dialing::process_invites(set, cfg_.groups, a.epoch);
  if (plan.dial) {
    for (std::size_t g = 0; g < cfg_.groups.size(); ++g) {
      if (cfg_.groups[g].id != *plan.dial) continue;
      auto it = std::find_if(matches.begin(), matches.end(), [&](const auto& m) { return m.group == g; });
      if (it == matches.end()) it = matches.insert(matches.end(), dialing::GroupMatch{g, {}});
      it->matched.push_back(own_invite_);
    }
  }
  decision_ = dialing::choose_call(matches);
  rec_.timing("dial_process_us", a.epoch, 0, mailbox_, steady_us() - t0);

  std::vector<std::uint32_t> targets;
  nodes::DecisionRecord record;
  record.epoch = a.epoch;
  record.client = mailbox_;
  record.dialed = plan.dial.has_value();
  if (decision_->group) {
    const auto& g = cfg_.groups[*decision_->group];
    record.group = g.id;
    for (std::size_t m = 0; m < g.members.size(); ++m) {
      if (m == g.my_index || !directory_) continue;
      for (const auto& e : directory_->entries) {
        if (e.identity == g.members[m]) targets.push_back(e.mailbox_id);
      }
    }
  }
  try {
    selection_ = mapping::select_indices(targets, mapping_, rng_);
  } catch (const Error& e) {
    rec_.event("selection_failed", e.what());
    selection_ = mapping::select_indices({}, mapping_, rng_);
    selection_.all_random = true;
  }
  in_call_ = decision_->group.has_value() && !selection_.all_random;
  record.all_random = selection_.all_random;
  record.targets = targets;
  rec_.decision(std::move(record));

  // Queries for every bucket go through one path; only the local state
  // knows which are covers.
  std::size_t max_len = 1;
  for (std::uint32_t b = 1; b <= a.n_buckets; ++b) max_len = std::max<std::size_t>(max_len, mapping_.query_length(b));
  keys_ = pir::pir_setup(cfg_.security_param, max_len, rng_, a.he);
  wire::QuerySubmit submit;
  submit.epoch = a.epoch;
  submit.client_tag = mailbox_;
  submit.token = token_;
  for (std::uint32_t b = 1; b <= a.n_buckets; ++b) {
    auto [state, query] = pir::pir_query(keys_, selection_.positions[b - 1], mapping_.query_length(b),
                                         cipher_->ciphertext_size(), rng_);
    state.is_cover = !selection_.is_real(b);
    query.client_tag = mailbox_;
    query.bucket_index = b;
    states_.push_back(state);
    submit.queries.push_back(std::move(query));
  }
  stage_ = Stage::Querying;
  if (intent(a.epoch).silent) return;
  out.send(worker_, wire::make_frame(submit, a.he));
}

void Client::run_round(std::uint32_t round, Outbox& out) {
  if (!epoch_info_ || !cipher_) return;
  const auto& a = *epoch_info_;
  const auto& plan = intent(a.epoch);
  if (plan.silent) return;
  const bool speaking = in_call_ && (plan.hangup_after == 0 || round <= plan.hangup_after);
  Bytes ct;
  if (speaking) {
    const auto t0 = steady_us();
    auto voice = synthetic_voice(mailbox_, a.epoch, round, capacity_ - 2);
    auto padded = wire::pad_snippet(voice, capacity_);
    const auto t1 = steady_us();
    const auto& g = cfg_.groups[*decision_->group];
    ct = cipher_->encrypt(g.gmk, crypto::round_iv(decision_->epoch_iv, round), padded);
    const auto t2 = steady_us();
    rec_.timing("encode_us", a.epoch, round, mailbox_, t1 - t0);
    rec_.timing("encrypt_us", a.epoch, round, mailbox_, t2 - t1);
  } else {
    ct = rng_.bytes(cipher_->ciphertext_size());
  }
  wire::SnippetSubmit submit{a.epoch, round, mailbox_, token_, wall_us(), std::move(ct)};
  out.send(relay_, wire::make_frame(submit));
  sent_round_ = round;
}

void Client::on_answers(const wire::AnswerSet& answers) {
  if (!epoch_info_ || answers.epoch != epoch_info_->epoch || states_.empty()) return;
  const auto e = answers.epoch;
  const auto r = answers.round;
  rec_.timing("answer_recv", e, r, mailbox_, wall_us());
  answered_round_ = std::max(answered_round_, r);
  if (answers.answers.size() != states_.size()) {
    rec_.event("answer_count_mismatch", std::to_string(answers.answers.size()));
    return;
  }
  if (!in_call_) return;
  const auto& g = cfg_.groups[*decision_->group];
  const auto iv = crypto::round_iv(decision_->epoch_iv, r);
  std::int64_t decode_us = 0, decrypt_us = 0;
  std::vector<std::pair<std::uint32_t, Bytes>> heard;
  for (const auto& ans : answers.answers) {
    const auto b = ans.bucket_index;
    if (b < 1 || b > states_.size() || states_[b - 1].is_cover) continue;
    const auto t0 = steady_us();
    Bytes ct;
    try {
      ct = pir::pir_decode(keys_.sk, states_[b - 1], ans);
    } catch (const Error& err) {
      rec_.event("pir_decode_failed", err.what());
      continue;
    }
    const auto t1 = steady_us();
    decode_us += t1 - t0;
    try {
      auto payload = wire::unpad_snippet(cipher_->decrypt(g.gmk, iv, ct));
      heard.emplace_back(*selection_.targets[b - 1], std::move(payload));
    } catch (const Error&) {
      // Partner sent a dummy or is in another call.
    }
    decrypt_us += steady_us() - t1;
  }
  rec_.timing("pir_decode_us", e, r, mailbox_, decode_us);
  rec_.timing("decrypt_us", e, r, mailbox_, decrypt_us);
  std::sort(heard.begin(), heard.end());
  const auto t0 = steady_us();
  Bytes mixed;
  if (cfg_.mix == MixMode::Pcm) {
    std::vector<Bytes> payloads;
    for (const auto& [s, p] : heard) payloads.push_back(p);
    mixed = mix_pcm(payloads);
  } else {
    mixed = mix_records(heard);
  }
  rec_.timing("mix_us", e, r, mailbox_, steady_us() - t0);
  for (auto& [sender, payload] : heard) rec_.output({e, r, mailbox_, sender, std::move(payload)});
  if (!heard.empty()) rec_.output({e, r, mailbox_, 0, std::move(mixed)});
}

std::optional<std::int64_t> Client::deadline() const {
  if (held_) return hold_until_;
  if (stage_ == Stage::AwaitInvites) return timer_;
  return std::nullopt;
}

void Client::on_deadline(Outbox& out) {
  if (held_) {
    if (clock_.now_us() >= hold_until_) {
      rec_.event("answers_missing", "round " + std::to_string(sent_round_));
      release_held(out);
    }
    return;
  }
  if (stage_ == Stage::AwaitInvites) {
    rec_.event("phase_missed", "invite broadcast incomplete");
    finish_dialing(out);
  }
}

}  // namespace pirates::client
