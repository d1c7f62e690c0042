#include "socnav/hitl_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace socnav::hitl {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxQueued = 64;

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

http::response<http::string_body> static_response(const std::filesystem::path& root,
                                                  const http::request<http::string_body>& req) {
  auto reply = [&](http::status status, std::string body, std::string_view type) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "socnav");
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    if (req.method() == http::verb::head) res.body().clear();
    return res;
  };
  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return reply(http::status::method_not_allowed, "method not allowed\n", "text/plain");
  }
  std::string target(req.target());
  target = target.substr(0, target.find('?'));
  if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos ||
      target.find('\\') != std::string::npos) {
    return reply(http::status::bad_request, "bad path\n", "text/plain");
  }
  if (target.back() == '/') target += "index.html";
  if (root.empty()) return reply(http::status::not_found, "not found\n", "text/plain");

  const std::filesystem::path file = root / target.substr(1);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(file, ec)) return reply(http::status::not_found, "not found\n", "text/plain");
  std::ifstream in(file, std::ios::binary);
  std::ostringstream body;
  body << in.rdbuf();
  if (!in && !in.eof()) return reply(http::status::internal_server_error, "read error\n", "text/plain");
  return reply(http::status::ok, body.str(), mime_type(file));
}

}  // namespace

class WsSession;

namespace detail {

struct ServerState {
  ServerState(Scenario s, ServerOptions o)
      : options(std::move(o)),
        session(std::move(s), options.session),
        period(options.tick_period.value_or(session.scenario().dt)),
        latest_state(to_json(session.state()).dump()) {
    if (!(period > 0.0)) throw std::invalid_argument("server: tick period must be positive");
  }

  ServerOptions options;
  Session session;
  double period;
  mutable std::mutex session_mutex;  // session and latest_state

  std::string latest_state;

  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread sim_thread;

  InputSlot slot;
  std::mutex client_mutex;
  std::weak_ptr<WsSession> client;
  std::atomic<bool> connected{false};

  std::atomic<int> malformed{0};
  std::atomic<int> refused{0};
  std::atomic<int> clients{0};
  std::atomic<bool> stopping{false};
  std::atomic<bool> started{false};
  std::uint16_t bound_port = 0;

  std::mutex done_mutex;
  std::condition_variable done_cv;
  bool finished = false;  // guarded by done_mutex
  bool recorded = false;  // guarded by done_mutex

  void accept();
  void loop();
  bool attach(const std::shared_ptr<WsSession>& s);
  void detach(const WsSession* s);
  void broadcast(std::string text);
  void write_recording_once();

  std::string snapshot() const {
    std::lock_guard lock(session_mutex);
    return latest_state;
  }
  bool is_finished() {
    std::lock_guard lock(done_mutex);
    return finished;
  }
};

}  // namespace detail

using Impl = detail::ServerState;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Impl& server) : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->read();
    });
  }

  void send(std::string text) {
    if (closing_ && queue_.empty()) return;
    // A slow client loses intermediate states rather than growing the queue without bound.
    if (queue_.size() >= kMaxQueued) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->gone();
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->handle(text);
      if (!self->closing_) self->read();
    });
  }

  void handle(const std::string& text) {
    ClientMessage msg;
    try {
      msg = parse_client_message(text);
    } catch (const ProtocolError&) {
      ++server_.malformed;
      return;
    }
    if (const auto* hello = std::get_if<HelloMsg>(&msg)) {
      if (attached_) return;
      if (hello->schema != kProtocolSchema) {
        refuse("schema " + std::to_string(hello->schema) + " not supported; server speaks " +
               std::to_string(kProtocolSchema));
      } else if (!server_.attach(shared_from_this())) {
        refuse("busy");
      } else {
        attached_ = true;
        const Scenario& sc = server_.session.scenario();
        send(hello_reply(server_.options.session.human_id, sc.dt, sc.limits).dump());
        send(server_.snapshot());
        if (server_.is_finished()) send(pause_message("finished").dump());
      }
      return;
    }
    if (!attached_) {
      ++server_.malformed;
      return;
    }
    server_.slot.put(std::get<InputMsg>(msg), InputSlot::Clock::now());
  }

  void refuse(const std::string& reason) {
    ++server_.refused;
    send(hello_refusal(reason).dump());
    closing_ = true;
  }

  void write() {
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->gone();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write();
      } else if (self->closing_) {
        self->ws_.async_close(websocket::close_code::policy_error, [self](beast::error_code) {});
      }
    });
  }

  void gone() {
    if (attached_) server_.detach(this);
    attached_ = false;
  }

  websocket::stream<beast::tcp_stream> ws_;
  Impl& server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool attached_ = false;
  bool closing_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Impl& server) : stream_(std::move(socket)), server_(server) {}

  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      if (websocket::is_upgrade(self->req_)) {
        self->stream_.expires_never();
        std::make_shared<WsSession>(self->stream_.release_socket(), self->server_)->run(std::move(self->req_));
        return;
      }
      self->respond();
    });
  }

 private:
  void respond() {
    res_ = std::make_shared<http::response<http::string_body>>(static_response(server_.options.static_dir, req_));
    http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec || self->res_->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
};

void detail::ServerState::accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), *this)->read();
    accept();
  });
}

bool detail::ServerState::attach(const std::shared_ptr<WsSession>& s) {
  std::lock_guard lock(client_mutex);
  if (client.lock()) return false;
  client = s;
  slot.clear();
  slot.touch(InputSlot::Clock::now());
  connected = true;
  ++clients;
  return true;
}

void detail::ServerState::detach(const WsSession* s) {
  std::lock_guard lock(client_mutex);
  if (client.lock().get() != s) return;
  client.reset();
  connected = false;
  // A new client starts from a zero command, not from whatever the last one held.
  slot.clear();
}

void detail::ServerState::broadcast(std::string text) {
  std::shared_ptr<WsSession> s;
  {
    std::lock_guard lock(client_mutex);
    s = client.lock();
  }
  if (!s) return;
  net::post(ioc, [s, text = std::move(text)]() mutable { s->send(std::move(text)); });
}

void detail::ServerState::write_recording_once() {
  {
    std::lock_guard lock(done_mutex);
    if (recorded || !options.record_path) return;
    recorded = true;
  }
  Recording rec;
  {
    std::lock_guard lock(session_mutex);
    rec = make_recording(session);
  }
  std::ofstream out(*options.record_path);
  write_recording(rec, out);
  if (!out) std::cerr << "hitl: could not write recording to " << options.record_path->string() << '\n';
}

void detail::ServerState::loop() {
  using Clock = std::chrono::steady_clock;
  const auto period_d = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(period));
  const Limits limits = session.scenario().limits;
  auto next = Clock::now();
  std::string announced;
  while (!stopping) {
    std::optional<std::string> reason =
        is_finished() ? std::optional<std::string>("finished")
                      : pause_reason(connected, slot.age(Clock::now()), options.session.stale_timeout);
    if (reason) {
      if (*reason != announced) broadcast(pause_message(*reason).dump());
      announced = *reason;
    } else {
      announced.clear();
      const std::optional<InputMsg> input = slot.latest();
      const AgentControl command = input ? input_control(*input, limits) : AgentControl{};
      std::string state;
      bool done = false;
      try {
        std::lock_guard lock(session_mutex);
        session.advance(command);
        latest_state = to_json(session.state()).dump();
        state = latest_state;
        done = session.finished();
      } catch (const std::exception& e) {
        std::cerr << "hitl: tick failed: " << e.what() << '\n';
        done = true;
      }
      if (!state.empty()) broadcast(std::move(state));
      if (done) {
        {
          std::lock_guard lock(done_mutex);
          finished = true;
        }
        write_recording_once();
        done_cv.notify_all();
        continue;  // announce the finish on the next pass
      }
    }
    next += period_d;
    const auto now = Clock::now();
    if (next < now) next = now;  // an overrun never queues up catch-up ticks
    std::unique_lock lock(done_mutex);
    done_cv.wait_until(lock, next, [this] { return stopping.load(); });
  }
}

Server::Server(Scenario scenario, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->started.exchange(true)) throw std::logic_error("server: already started");
  Impl& s = *impl_;
  beast::error_code ec;
  const tcp::endpoint endpoint(net::ip::make_address(s.options.address, ec), s.options.port);
  if (ec) throw std::runtime_error("server: bad address '" + s.options.address + "'");
  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(endpoint, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("server: cannot listen on " + s.options.address + ":" +
                                   std::to_string(s.options.port) + ": " + ec.message());
  s.bound_port = s.acceptor.local_endpoint().port();
  s.accept();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.sim_thread = std::thread([&s] { s.loop(); });
}

void Server::stop() {
  Impl& s = *impl_;
  if (!s.started || s.stopping.exchange(true)) return;
  { std::lock_guard lock(s.done_mutex); }  // no waiter can miss the flag
  s.done_cv.notify_all();
  if (s.sim_thread.joinable()) s.sim_thread.join();
  s.write_recording_once();
  net::post(s.ioc, [&s] {
    beast::error_code ignored;
    s.acceptor.close(ignored);
  });
  s.ioc.stop();
  if (s.io_thread.joinable()) s.io_thread.join();
}

void Server::wait() {
  std::unique_lock lock(impl_->done_mutex);
  impl_->done_cv.wait(lock, [this] { return impl_->finished || impl_->stopping; });
}

bool Server::wait_for(double seconds) {
  std::unique_lock lock(impl_->done_mutex);
  impl_->done_cv.wait_for(lock, std::chrono::duration<double>(seconds),
                          [this] { return impl_->finished || impl_->stopping; });
  return impl_->finished;
}

std::uint16_t Server::port() const { return impl_->bound_port; }

ServerStats Server::stats() const {
  ServerStats st;
  {
    std::lock_guard lock(impl_->session_mutex);
    st.ticks = impl_->session.tick();
    st.overruns = impl_->session.overruns();
  }
  st.malformed = impl_->malformed;
  st.refused = impl_->refused;
  st.clients = impl_->clients;
  st.connected = impl_->connected;
  std::lock_guard lock(impl_->done_mutex);
  st.finished = impl_->finished;
  return st;
}

EpisodeLog Server::log() const {
  std::lock_guard lock(impl_->session_mutex);
  return impl_->session.log();
}

Recording Server::recording() const {
  std::lock_guard lock(impl_->session_mutex);
  return make_recording(impl_->session);
}

}  // namespace socnav::hitl
