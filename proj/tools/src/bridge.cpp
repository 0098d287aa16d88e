#include "quadchase_tools/bridge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace quadchase::tools {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::mutex log_mutex;

void log_line(const std::string& text) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::clog << "[bridge] " << text << std::endl;
}

std::map<std::string, std::string> parse_query(std::string_view target) {
  std::map<std::string, std::string> out;
  const auto q = target.find('?');
  if (q == std::string_view::npos) return out;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    out[std::string(pair.substr(0, eq))] =
        eq == std::string_view::npos ? "" : std::string(pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return out;
}

bool valid_session_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
         });
}

}  // namespace

class SessionHost;

class Client : public std::enable_shared_from_this<Client> {
 public:
  Client(tcp::socket socket, std::size_t queue_limit)
      : ws_(std::move(socket)), queue_limit_(queue_limit) {}

  void run(http::request<http::string_body> request, std::shared_ptr<SessionHost> host);

  /// Thread-safe: queues a frame on this client's strand.
  void send(std::shared_ptr<const std::string> frame) {
    net::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)] {
      self->queue_.push_back(frame);
      // The front frame may be in flight; drop the oldest one after it.
      const std::size_t keep = self->writing_ ? 1 : 0;
      while (self->queue_.size() > self->queue_limit_ + keep) {
        self->queue_.erase(self->queue_.begin() + static_cast<std::ptrdiff_t>(keep));
        ++self->dropped_;
      }
      if (!self->writing_) self->write_next();
    });
  }

  /// Thread-safe: closes the connection after queued frames.
  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (!self->writing_) self->finish();
    });
  }

 private:
  void read_next();
  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (closing_) finish();
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->queue_.pop_front();
                      if (ec) {
                        self->writing_ = false;
                        return;
                      }
                      self->write_next();
                    });
  }
  void finish() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  std::size_t queue_limit_;
  std::uint64_t dropped_ = 0;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
  std::shared_ptr<SessionHost> host_;
};

struct Bridge::Impl {
  explicit Impl(BridgeOptions o) : options(std::move(o)), acceptor(ioc) {}

  BridgeOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> workers;
  std::atomic<std::uint64_t> missed{0};
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<SessionHost>> sessions;
  std::uint64_t next_id = 1;
  std::condition_variable stop_cv;
  bool stop_requested = false;
  bool stopped = false;
  bool started = false;
  std::uint16_t bound_port = 0;
  std::unique_ptr<net::signal_set> signals;

  void accept_next();
  std::shared_ptr<SessionHost> open_session(const std::string& requested_id, bool paused);
  void forget(const std::string& id);
  json sessions_json();
};

class SessionHost : public std::enable_shared_from_this<SessionHost> {
 public:
  SessionHost(Bridge::Impl& bridge, std::string id, bool paused)
      : bridge_(bridge),
        id_(std::move(id)),
        strand_(net::make_strand(bridge.ioc)),
        timer_(strand_),
        session_(bridge.options.config, bridge.options.session, paused),
        period_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(1.0 / bridge.options.tick_hz))) {
    update_summary(0);
  }

  const std::string& id() const { return id_; }

  void start() {
    net::post(strand_, [self = shared_from_this()] {
      self->deadline_ = Clock::now() + self->period_;
      self->arm();
    });
  }

  void join(std::shared_ptr<Client> client) {
    net::post(strand_, [self = shared_from_this(), client] {
      if (self->closed_) {
        client->send(std::make_shared<const std::string>(
            json{{"type", "error"}, {"code", "closed"}, {"message", "session has ended"}}
                .dump()));
        client->close();
        return;
      }
      self->clients_.push_back(client);
      const json hello = {{"type", "hello"},
                          {"session", self->id_},
                          {"tick", self->session_.tick()},
                          {"paused", self->session_.paused()},
                          {"dt", self->bridge_.options.config.mpc.dt},
                          {"V_bar", self->bridge_.options.config.chase.priors.V_bar}};
      client->send(std::make_shared<const std::string>(hello.dump()));
      self->update_summary(self->clients_.size());
    });
  }

  void leave(const Client* client) {
    net::post(strand_, [self = shared_from_this(), client] {
      std::erase_if(self->clients_, [&](const std::weak_ptr<Client>& w) {
        const auto c = w.lock();
        return !c || c.get() == client;
      });
      self->update_summary(self->clients_.size());
      if (self->clients_.empty()) self->close();
    });
  }

  void deliver(std::shared_ptr<Client> client, std::string text) {
    net::post(strand_, [self = shared_from_this(), client, text = std::move(text)] {
      if (self->closed_) return;
      client->send(std::make_shared<const std::string>(self->session_.accept(text).dump()));
    });
  }

  /// Ends the loop and persists the logs. Runs on the strand, or after the
  /// workers have stopped.
  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    if (bridge_.options.log_dir) {
      try {
        session_.write_logs(*bridge_.options.log_dir / id_);
      } catch (const std::exception& e) {
        log_line("session " + id_ + ": cannot write logs: " + e.what());
      }
    }
    bridge_.forget(id_);
  }

  json summary() {
    std::lock_guard<std::mutex> lock(summary_mutex_);
    return summary_;
  }

 private:
  void arm() {
    timer_.expires_at(deadline_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->on_tick();
    });
  }

  void on_tick() {
    const auto late = Clock::now() - deadline_;
    if (late > period_) {
      ++bridge_.missed;
      log_line("session " + id_ + ": tick " + std::to_string(session_.tick() + 1) +
               " started " +
               std::to_string(std::chrono::duration<double, std::milli>(late).count()) +
               " ms late");
    }
    if (auto frame = session_.advance()) {
      const auto text = std::make_shared<const std::string>(frame->dump());
      for (const auto& w : clients_) {
        if (const auto c = w.lock()) c->send(text);
      }
    }
    update_summary(clients_.size());
    deadline_ += period_;
    arm();
  }

  void update_summary(std::size_t clients) {
    json s = session_.summary();
    s["id"] = id_;
    s["clients"] = clients;
    std::lock_guard<std::mutex> lock(summary_mutex_);
    summary_ = std::move(s);
  }

  Bridge::Impl& bridge_;
  std::string id_;
  net::strand<net::io_context::executor_type> strand_;
  net::steady_timer timer_;
  Session session_;
  Clock::duration period_;
  Clock::time_point deadline_;
  std::vector<std::weak_ptr<Client>> clients_;
  bool closed_ = false;
  std::mutex summary_mutex_;
  json summary_;
};

void Client::run(http::request<http::string_body> request, std::shared_ptr<SessionHost> host) {
  host_ = std::move(host);
  net::dispatch(ws_.get_executor(), [self = shared_from_this(), request = std::move(request)] {
    beast::get_lowest_layer(self->ws_).expires_never();
    self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    self->ws_.async_accept(request, [self](beast::error_code ec) {
      if (ec) {
        self->host_->leave(self.get());
        return;
      }
      self->host_->join(self);
      self->read_next();
    });
  });
}

void Client::read_next() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->host_->leave(self.get());
      return;
    }
    std::string text = beast::buffers_to_string(self->buffer_.data());
    self->buffer_.consume(self->buffer_.size());
    self->host_->deliver(self, std::move(text));
    self->read_next();
  });
}

namespace {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Bridge::Impl& bridge)
      : stream_(std::move(socket)), bridge_(bridge) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read_next(); });
  }

 private:
  void read_next() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       self->handle();
                     });
  }

  void handle() {
    const std::string target(request_.target());
    const std::string path = target.substr(0, target.find('?'));
    if (websocket::is_upgrade(request_)) {
      if (path != "/session") return respond(http::status::not_found, error("no such endpoint"));
      const auto query = parse_query(target);
      const auto id_it = query.find("id");
      const std::string id = id_it == query.end() ? "" : id_it->second;
      if (id_it != query.end() && !valid_session_id(id)) {
        return respond(http::status::bad_request, error("session id must be 1-64 of [A-Za-z0-9_-]"));
      }
      const auto paused = query.find("paused");
      std::shared_ptr<SessionHost> host;
      try {
        host = bridge_.open_session(id, paused != query.end() && paused->second == "1");
      } catch (const std::exception& e) {
        return respond(http::status::internal_server_error, error(e.what()));
      }
      auto client = std::make_shared<Client>(stream_.release_socket(),
                                             bridge_.options.queue_limit);
      client->run(std::move(request_), std::move(host));
      return;
    }
    if (request_.method() != http::verb::get) {
      return respond(http::status::method_not_allowed, error("only GET is supported"));
    }
    if (path == "/health") {
      std::size_t open = 0;
      {
        std::lock_guard<std::mutex> lock(bridge_.mutex);
        open = bridge_.sessions.size();
      }
      return respond(http::status::ok, {{"status", "ok"},
                                        {"sessions", open},
                                        {"tick_hz", bridge_.options.tick_hz},
                                        {"missed_deadlines", bridge_.missed.load()}});
    }
    if (path == "/sessions") return respond(http::status::ok, bridge_.sessions_json());
    respond(http::status::not_found, error("no such endpoint"));
  }

  static json error(const std::string& message) { return {{"error", message}}; }

  void respond(http::status status, const json& body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
    res->set(http::field::content_type, "application/json");
    res->keep_alive(request_.keep_alive());
    res->body() = body.dump() + "\n";
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec,
                                                                      std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read_next();
    });
  }

  beast::tcp_stream stream_;
  Bridge::Impl& bridge_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

void Bridge::Impl::accept_next() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) log_line("accept: " + ec.message());
      if (!acceptor.is_open()) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    }
    accept_next();
  });
}

std::shared_ptr<SessionHost> Bridge::Impl::open_session(const std::string& requested_id,
                                                        bool paused) {
  std::shared_ptr<SessionHost> host;
  {
    std::lock_guard<std::mutex> lock(mutex);
    std::string id = requested_id;
    if (!id.empty()) {
      if (const auto it = sessions.find(id); it != sessions.end()) return it->second;
    } else {
      do {
        id = "s" + std::to_string(next_id++);
      } while (sessions.count(id));
    }
    host = std::make_shared<SessionHost>(*this, id, paused);
    sessions.emplace(id, host);
  }
  log_line("session " + host->id() + " opened");
  host->start();
  return host;
}

void Bridge::Impl::forget(const std::string& id) {
  {
    std::lock_guard<std::mutex> lock(mutex);
    sessions.erase(id);
  }
  log_line("session " + id + " closed");
}

json Bridge::Impl::sessions_json() {
  std::vector<std::shared_ptr<SessionHost>> hosts;
  {
    std::lock_guard<std::mutex> lock(mutex);
    for (const auto& [id, host] : sessions) hosts.push_back(host);
  }
  json list = json::array();
  for (const auto& h : hosts) list.push_back(h->summary());
  return list;
}

Bridge::Bridge(BridgeOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (!(impl_->options.tick_hz > 0.0)) throw ConfigError("bridge: tick rate must be positive");
  if (impl_->options.queue_limit == 0) throw ConfigError("bridge: queue limit must be positive");
  if (impl_->options.threads < 1) throw ConfigError("bridge: need at least one thread");
  impl_->options.config.validate();
}

Bridge::~Bridge() { stop(); }

void Bridge::start() {
  Impl& m = *impl_;
  if (m.started) return;
  const tcp::endpoint endpoint(net::ip::make_address(m.options.address), m.options.port);
  m.acceptor.open(endpoint.protocol());
  m.acceptor.set_option(net::socket_base::reuse_address(true));
  m.acceptor.bind(endpoint);
  m.acceptor.listen(net::socket_base::max_listen_connections);
  m.started = true;
  m.bound_port = m.acceptor.local_endpoint().port();
  m.accept_next();
  m.signals = std::make_unique<net::signal_set>(m.ioc, SIGINT, SIGTERM);
  m.signals->async_wait([&m](beast::error_code ec, int) {
    if (ec) return;
    std::lock_guard<std::mutex> lock(m.mutex);
    m.stop_requested = true;
    m.stop_cv.notify_all();
  });
  for (int i = 0; i < m.options.threads; ++i) m.workers.emplace_back([&m] { m.ioc.run(); });
  log_line("listening on " + m.options.address + ":" + std::to_string(port()));
}

void Bridge::wait() {
  Impl& m = *impl_;
  {
    std::unique_lock<std::mutex> lock(m.mutex);
    m.stop_cv.wait(lock, [&] { return m.stop_requested || m.stopped; });
  }
  stop();
}

void Bridge::stop() {
  Impl& m = *impl_;
  {
    std::lock_guard<std::mutex> lock(m.mutex);
    if (m.stopped || !m.started) return;
    m.stopped = true;
    m.stop_cv.notify_all();
  }
  m.ioc.stop();
  for (std::thread& t : m.workers) t.join();
  m.workers.clear();
  std::vector<std::shared_ptr<SessionHost>> hosts;
  {
    std::lock_guard<std::mutex> lock(m.mutex);
    for (const auto& [id, host] : m.sessions) hosts.push_back(host);
  }
  for (const auto& h : hosts) h->close();
  beast::error_code ignored;
  m.acceptor.close(ignored);
}

std::uint16_t Bridge::port() const { return impl_->bound_port; }

std::uint64_t Bridge::missed_deadlines() const { return impl_->missed.load(); }

}  // namespace quadchase::tools
