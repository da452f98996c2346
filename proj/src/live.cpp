#include "sensaptic/live.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "sensaptic/errors.hpp"

namespace sensaptic {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::size_t kFrameLogLimit = 50000;
constexpr std::size_t kOutboxLimit = 64;

const char* mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

}  // namespace

std::optional<ConsoleInput> parse_console_message(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) return std::nullopt;

  auto read = [&](const char* key) -> std::optional<double> {
    auto v = doc.find(key);
    if (v == doc.end() || !v->is_number()) return std::nullopt;
    const double x = v->get<double>();
    if (!std::isfinite(x) || x < -1.0 || x > 1.0) return std::nullopt;
    return x;
  };

  if (*type == "impulse") {
    if (auto m = read("magnitude")) return ConsoleInput{ConsoleInput::Kind::kImpulse, *m};
  } else if (*type == "turn") {
    if (auto w = read("omega")) return ConsoleInput{ConsoleInput::Kind::kTurn, *w};
  }
  return std::nullopt;
}

json telemetry_json(const Snapshot& s) {
  return {
      {"type", "telemetry"},
      {"t", s.t},
      {"ref_pos", s.ref_pos},
      {"slave_pos", s.slave_pos},
      {"distance_mm", s.distance_mm},
      {"haptic_hz", s.haptic_hz},
      {"haptic_active", s.haptic_active},
      {"channel", {{"sent", s.channel.sent}, {"dropped", s.channel.dropped}}},
  };
}

class WsSession;

struct LiveServer::Impl {
  Impl(const ScenarioConfig& cfg, unsigned short port, const std::string& host)
      : config(cfg), sim(std::make_unique<Simulation>(cfg, false)), acceptor(ioc) {
    try {
      const tcp::endpoint endpoint(net::ip::make_address(host), port);
      acceptor.open(endpoint.protocol());
      acceptor.set_option(net::socket_base::reuse_address(true));
      acceptor.bind(endpoint);
      acceptor.listen(net::socket_base::max_listen_connections);
    } catch (const boost::system::system_error& e) {
      throw StartupError("cannot listen on " + host + ":" + std::to_string(port) + ": " +
                         e.code().message());
    }
    latest = sim->snapshot();
  }

  void accept();
  void broadcast(std::shared_ptr<const std::string> text);
  void sim_loop();

  ScenarioConfig config;
  std::unique_ptr<Simulation> sim;  // touched only by the simulation thread once started
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> running{false};
  std::atomic<bool> stopping{false};

  std::mutex input_mutex;
  std::vector<ConsoleInput> inputs;

  mutable std::mutex state_mutex;
  Snapshot latest;
  std::uint64_t latest_tick = 0;
  std::deque<FrameEvent> frames;
  std::vector<std::uint64_t> detections;
  std::string failure;

  std::set<std::shared_ptr<WsSession>> sessions;  // I/O thread only
  std::atomic<std::uint64_t> malformed{0};
  std::atomic<std::uint64_t> telemetry_count{0};
  std::atomic<std::size_t> client_count{0};
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, LiveServer::Impl& server)
      : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_.sessions.insert(self);
      ++self->server_.client_count;
      self->read();
    });
  }

  void send(std::shared_ptr<const std::string> text) {
    // A client that cannot keep up loses telemetry rather than growing memory.
    if (outbox_.size() >= kOutboxLimit) return;
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto input = self->ws_.got_text() ? parse_console_message(text) : std::nullopt) {
        std::lock_guard lock(self->server_.input_mutex);
        self->server_.inputs.push_back(*input);
      } else {
        ++self->server_.malformed;
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->close();
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  void close() {
    if (server_.sessions.erase(shared_from_this()) > 0) --server_.client_count;
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  LiveServer::Impl& server_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, LiveServer::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
        return;
      }
      reply_text(http::status::not_found, "no websocket endpoint here\n");
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      reply_text(http::status::method_not_allowed, "GET only\n");
      return;
    }
    serve_file();
  }

  void serve_file() {
    const std::string& root = server_.config.live.assets_dir;
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (root.empty() || target.empty() || target.front() != '/' ||
        target.find("..") != std::string::npos) {
      reply_text(http::status::not_found, "not found\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = std::filesystem::path(root) / target.substr(1);

    http::file_body::value_type body;
    beast::error_code ec;
    body.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (ec) {
      reply_text(http::status::not_found, "not found\n");
      return;
    }
    auto res = std::make_shared<http::response<http::file_body>>(
        std::piecewise_construct, std::make_tuple(std::move(body)),
        std::make_tuple(http::status::ok, req_.version()));
    res->set(http::field::content_type, mime_type(path));
    res->keep_alive(false);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  void reply_text(http::status status, std::string text) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = std::move(text);
    res->keep_alive(false);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  LiveServer::Impl& server_;
};

void LiveServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec == net::error::operation_aborted) return;
    } else {
      std::make_shared<HttpSession>(std::move(socket), *this)->run();
    }
    accept();
  });
}

void LiveServer::Impl::broadcast(std::shared_ptr<const std::string> text) {
  net::post(ioc, [this, text = std::move(text)] {
    for (const auto& session : sessions) session->send(text);
  });
}

void LiveServer::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const double dt = config.dt;
  const double telemetry_period = 1.0 / config.live.telemetry_hz;
  // Never replay more than this much simulated time in one burst after a stall.
  const auto max_burst = static_cast<std::uint64_t>(std::ceil(0.05 / dt));

  std::vector<FrameEvent> pending;
  sim->set_frame_observer([&](const FrameEvent& e) { pending.push_back(e); });

  auto origin = clock::now();
  std::uint64_t tick_origin = 0;
  double next_telemetry = 0.0;
  std::vector<ConsoleInput> batch;

  while (!stopping) {
    {
      std::lock_guard lock(input_mutex);
      batch.swap(inputs);
    }
    for (const auto& in : batch) {
      if (in.kind == ConsoleInput::Kind::kImpulse) {
        sim->inject_impulse(in.value);
      } else {
        sim->set_turn(in.value);
      }
    }
    batch.clear();

    const double elapsed = std::chrono::duration<double>(clock::now() - origin).count();
    auto target = tick_origin + static_cast<std::uint64_t>(elapsed / dt);
    if (target > sim->tick() + max_burst) {
      // Fell behind the wall clock; drop the backlog instead of racing it.
      target = sim->tick() + max_burst;
      origin = clock::now();
      tick_origin = target;
    }

    std::vector<std::uint64_t> detected;
    try {
      while (sim->tick() < target) {
        const auto before = sim->counters().pulses_detected;
        sim->step();
        if (sim->counters().pulses_detected != before) detected.push_back(sim->tick() - 1);
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(state_mutex);
      failure = e.what();
      running = false;
      return;
    }

    const Snapshot snap = sim->snapshot();
    {
      std::lock_guard lock(state_mutex);
      latest = snap;
      latest_tick = sim->tick();
      for (auto& f : pending) frames.push_back(std::move(f));
      while (frames.size() > kFrameLogLimit) frames.pop_front();
      detections.insert(detections.end(), detected.begin(), detected.end());
    }
    pending.clear();

    const double wall = std::chrono::duration<double>(clock::now() - origin).count() +
                        static_cast<double>(tick_origin) * dt;
    if (wall >= next_telemetry) {
      broadcast(std::make_shared<const std::string>(telemetry_json(snap).dump()));
      ++telemetry_count;
      next_telemetry = wall + telemetry_period;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(500));
  }
}

LiveServer::LiveServer(const ScenarioConfig& config, unsigned short port, const std::string& host)
    : impl_(std::make_unique<Impl>(config, port, host)) {}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start() {
  if (impl_->running.exchange(true)) return;
  impl_->accept();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->sim_thread = std::thread([this] { impl_->sim_loop(); });
}

void LiveServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  beast::error_code ignored;
  impl_->acceptor.close(ignored);
  impl_->sessions.clear();
  impl_->running = false;
}

bool LiveServer::running() const { return impl_->running; }

std::string LiveServer::error() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->failure;
}

unsigned short LiveServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void LiveServer::submit(const ConsoleInput& input) {
  std::lock_guard lock(impl_->input_mutex);
  impl_->inputs.push_back(input);
}

Snapshot LiveServer::snapshot() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->latest;
}

std::uint64_t LiveServer::tick() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->latest_tick;
}

std::vector<FrameEvent> LiveServer::frame_log() const {
  std::lock_guard lock(impl_->state_mutex);
  return {impl_->frames.begin(), impl_->frames.end()};
}

std::vector<std::uint64_t> LiveServer::detection_ticks() const {
  std::lock_guard lock(impl_->state_mutex);
  return impl_->detections;
}

std::uint64_t LiveServer::malformed_messages() const { return impl_->malformed; }

std::uint64_t LiveServer::telemetry_sent() const { return impl_->telemetry_count; }

std::size_t LiveServer::clients() const { return impl_->client_count; }

}  // namespace sensaptic
