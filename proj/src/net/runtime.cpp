#include "pirates/net/runtime.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::net {

using nodes::PeerId;

TcpRuntime::~TcpRuntime() { stop_all(); }

wire::Endpoint TcpRuntime::listen(const wire::Endpoint& ep) {
  wire::Endpoint bound;
  listener_ = listen_on(ep, &bound);
  acceptor_ = std::thread([this] {
    for (;;) {
      Socket s = accept_from(listener_);
      if (!s.valid()) return;
      Event ev;
      ev.kind = Event::Kind::Accepted;
      ev.sock = std::move(s);
      push(std::move(ev));
    }
  });
  return bound;
}

void TcpRuntime::push(Event ev) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(ev));
  }
  cv_.notify_one();
}

TcpRuntime::Conn& TcpRuntime::add_conn(Socket sock, std::optional<PeerId> peer) {
  auto conn = std::make_unique<Conn>();
  conn->id = next_conn_++;
  conn->sock = std::move(sock);
  conn->peer = peer;
  Conn& c = *conn;
  conns_[c.id] = std::move(conn);
  if (peer) routes_[*peer] = c.id;
  c.reader = std::thread([this, id = c.id, fd = c.sock.fd()] {
    Socket view(fd);
    wire::FrameDecoder decoder;
    std::vector<std::uint8_t> buf(1 << 16);
    std::string detail = "eof";
    try {
      for (;;) {
        const auto n = recv_some(view, buf.data(), buf.size());
        if (n == 0) break;
        decoder.feed(ByteView(buf.data(), n));
        while (auto f = decoder.next()) {
          Event ev;
      ev.kind = Event::Kind::Frame;
          ev.conn = id;
          ev.frame = std::move(*f);
          push(std::move(ev));
        }
      }
    } catch (const std::exception& e) {
      detail = e.what();
    }
    view.release();
    Event ev;
      ev.kind = Event::Kind::Closed;
    ev.conn = id;
    ev.detail = detail;
    push(std::move(ev));
  });
  return c;
}

void TcpRuntime::apply(nodes::Outbox& out, nodes::Recorder& rec) {
  for (auto& action : out.actions()) {
    if (auto* send = std::get_if<nodes::Outbox::Send>(&action)) {
      auto it = routes_.find(send->to);
      if (it == routes_.end()) {
        rec.event("unroutable", send->to.str());
        continue;
      }
      Conn& c = *conns_.at(it->second);
      if (!c.open) {
        rec.event("send_on_closed", send->to.str());
        continue;
      }
      rec.frame(true, send->to, send->frame);
      try {
        send_all(c.sock, wire::encode_frame(send->frame));
      } catch (const Error& e) {
        rec.event("send_failed", send->to.str() + ": " + e.what());
      }
    } else if (auto* connect = std::get_if<nodes::Outbox::Connect>(&action)) {
      if (routes_.contains(connect->peer)) continue;
      add_conn(connect_to(connect->endpoint), connect->peer);
    } else if (auto* rebind = std::get_if<nodes::Outbox::Rebind>(&action)) {
      auto it = routes_.find(rebind->from);
      if (it == routes_.end()) continue;
      const auto id = it->second;
      routes_.erase(it);
      routes_[rebind->to] = id;
      conns_.at(id)->peer = rebind->to;
    }
  }
  out.clear();
}

void TcpRuntime::handle(Event& ev, nodes::Node& node, nodes::Recorder& rec, nodes::Outbox& out) {
  switch (ev.kind) {
    case Event::Kind::Accepted:
      add_conn(std::move(ev.sock), std::nullopt);
      return;
    case Event::Kind::Closed: {
      auto it = conns_.find(ev.conn);
      if (it == conns_.end()) return;
      it->second->open = false;
      if (it->second->peer) {
        auto r = routes_.find(*it->second->peer);
        if (r != routes_.end() && r->second == ev.conn) routes_.erase(r);
      }
      if (!node.finished()) {
        rec.event("connection_closed", (it->second->peer ? it->second->peer->str() : "unidentified") +
                                           ": " + ev.detail);
      }
      return;
    }
    case Event::Kind::Frame: {
      auto it = conns_.find(ev.conn);
      if (it == conns_.end()) return;
      Conn& c = *it->second;
      if (!c.peer) {
        if (ev.frame.type != wire::MessageType::Hello) {
          rec.event("protocol_error", "first frame is not HELLO");
          c.sock.shutdown_both();
          return;
        }
        auto hello = wire::Hello::decode(ev.frame.payload);
        c.peer = hello.index == wire::kUnassigned ? PeerId::pending(hello.role, static_cast<std::uint32_t>(c.id))
                                                  : PeerId{hello.role, hello.index};
        routes_[*c.peer] = c.id;
      }
      rec.frame(false, *c.peer, ev.frame);
      try {
        node.on_frame(*c.peer, ev.frame, out);
      } catch (const Error& e) {
        rec.event("frame_rejected", c.peer->str() + ": " + e.what());
        out.clear();
        return;
      }
      apply(out, rec);
      return;
    }
  }
}

void TcpRuntime::run(nodes::Node& node, nodes::Recorder& rec, Options options) {
  nodes::SteadyClock clock;
  const auto started = clock.now_us();
  nodes::Outbox out;
  node.start(out);
  apply(out, rec);
  while (!node.finished()) {
    std::deque<Event> batch;
    {
      std::unique_lock lock(mu_);
      auto ready = [&] { return !queue_.empty(); };
      if (auto d = node.deadline()) {
        const auto wait = std::max<std::int64_t>(0, *d - clock.now_us());
        cv_.wait_for(lock, std::chrono::microseconds(wait), ready);
      } else {
        cv_.wait_for(lock, std::chrono::milliseconds(200), ready);
      }
      batch.swap(queue_);
    }
    for (auto& ev : batch) {
      handle(ev, node, rec, out);
      if (node.finished()) break;
    }
    if (node.finished()) break;
    if (auto d = node.deadline(); d && clock.now_us() >= *d) {
      node.on_deadline(out);
      apply(out, rec);
    }
    if (options.max_duration.count() > 0 &&
        clock.now_us() - started > std::chrono::duration_cast<std::chrono::microseconds>(options.max_duration).count()) {
      rec.event("deadline_overrun", "runtime limit reached");
      stop_all();
      throw Error(ErrorCode::DeadlineOverrun, "node did not finish in time");
    }
  }

  // Half-close, then give peers a moment to drain and hang up.
  for (auto& [id, c] : conns_) c->sock.shutdown_write();
  const auto until = clock.now_us() + std::chrono::duration_cast<std::chrono::microseconds>(options.linger).count();
  for (;;) {
    bool all_closed = true;
    for (auto& [id, c] : conns_) all_closed = all_closed && !c->open;
    if (all_closed || clock.now_us() >= until) break;
    std::deque<Event> batch;
    {
      std::unique_lock lock(mu_);
      cv_.wait_for(lock, std::chrono::milliseconds(50), [&] { return !queue_.empty(); });
      batch.swap(queue_);
    }
    for (auto& ev : batch) {
      if (ev.kind == Event::Kind::Closed) {
        if (auto it = conns_.find(ev.conn); it != conns_.end()) it->second->open = false;
      }
    }
  }
  stop_all();
}

void TcpRuntime::stop_all() {
  if (listener_.valid()) listener_.shutdown_both();
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  for (auto& [id, c] : conns_) c->sock.shutdown_both();
  for (auto& [id, c] : conns_) {
    if (c->reader.joinable()) c->reader.join();
  }
  conns_.clear();
  routes_.clear();
}

}  // namespace pirates::net
