#include "fireline/api_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <charconv>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fireline::api {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::vector<std::string_view> path_parts(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > start) parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::string_view> query_param(std::string_view query, std::string_view key) {
  std::size_t start = 0;
  while (start < query.size()) {
    std::size_t amp = query.find('&', start);
    if (amp == std::string_view::npos) amp = query.size();
    const auto kv = query.substr(start, amp - start);
    const auto eq = kv.find('=');
    if (kv.substr(0, eq) == key) return eq == std::string_view::npos ? std::string_view{} : kv.substr(eq + 1);
    start = amp + 1;
  }
  return std::nullopt;
}

Response error(unsigned status, std::string message) { return {status, {{"error", std::move(message)}}}; }

}  // namespace

Response handle(mission::MissionService& svc, std::string_view method, std::string_view target,
                std::string_view body) {
  const auto qpos = target.find('?');
  const std::string_view path = target.substr(0, qpos);
  const std::string_view query = qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1);
  const auto parts = path_parts(path);

  if (method == "OPTIONS") return {204, nullptr};

  if (parts.size() == 1 && parts[0] == "units" && method == "GET") {
    return {200, mission::to_json(svc.snapshot())};
  }
  if (parts.size() >= 2 && parts[0] == "units") {
    const auto id = to_int<std::uint32_t>(parts[1]);
    if (!id || *id > FirefighterId::kMax) return error(400, "invalid unit id");
    if (parts.size() == 2 && method == "GET") {
      auto u = svc.unit(FirefighterId(*id));
      if (!u) return error(404, "UnknownUnit");
      const auto cfg = svc.config();
      return {200, mission::to_json(*u, svc.now(), cfg.thresholds)};
    }
    if (parts.size() == 3 && parts[2] == "recall" && method == "POST") {
      auto cmd = svc.send_recall(FirefighterId(*id));
      if (!cmd) return error(404, "UnknownUnit");
      return {202, {{"command", codec::encode(*cmd)}, {"led", "PENDING"}}};
    }
    return error(405, "method not allowed");
  }
  if (parts.size() == 1 && parts[0] == "boundaries") {
    if (method == "GET") {
      json arr = json::array();
      for (const auto& b : svc.boundaries()) arr.push_back(mission::to_json(b));
      return {200, arr};
    }
    if (method == "POST") {
      geofence::DraftBoundary draft;
      try {
        const auto doc = json::parse(body);
        draft.name = doc.value("name", std::string());
        for (const auto& v : doc.at("vertices")) {
          GeoPoint p{v.at("lat").get<double>(), v.at("lon").get<double>()};
          if (!is_valid(p)) return error(400, "vertex out of range");
          draft.vertices.push_back(p);
        }
      } catch (const std::exception& e) {
        return error(400, std::string("bad boundary document: ") + e.what());
      }
      auto b = svc.add_boundary(std::move(draft));
      if (!b) return error(422, std::string(geofence::to_string(b.error())));
      return {201, mission::to_json(*b)};
    }
    return error(405, "method not allowed");
  }
  if (parts.size() == 2 && parts[0] == "boundaries" && method == "DELETE") {
    const auto id = to_int<std::uint64_t>(parts[1]);
    if (!id) return error(400, "invalid boundary id");
    if (!svc.delete_boundary(geofence::BoundaryId{*id})) return error(404, "unknown boundary");
    return {204, nullptr};
  }
  if (parts.size() == 1 && parts[0] == "log" && method == "GET") {
    std::uint64_t since = 0;
    if (auto s = query_param(query, "since"); s && !s->empty()) {
      auto v = to_int<std::uint64_t>(*s);
      if (!v) return error(400, "since must be a record sequence number");
      since = *v;
    }
    json arr = json::array();
    for (const auto& r : svc.log_since(since)) arr.push_back(r.to_json());
    return {200, arr};
  }
  if (parts.size() == 1 && parts[0] == "config" && method == "GET") {
    return {200, to_json(svc.config())};
  }
  return error(404, "not found");
}

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  std::string_view port_text = text;
  if (colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    else ep.host = "0.0.0.0";
    port_text = text.substr(colon + 1);
  }
  auto port = to_int<unsigned short>(port_text);
  if (!port) throw std::invalid_argument("invalid listen address: " + std::string(text));
  ep.port = *port;
  return ep;
}

// ---------------------------------------------------------------------------

class WsSession;

struct Server::Impl {
  Impl(mission::MissionService& s, Endpoint e) : svc(s), endpoint(std::move(e)), acceptor(ioc) {}

  mission::MissionService& svc;
  Endpoint endpoint;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::vector<std::weak_ptr<WsSession>> sessions;  // io thread only
  bool running = false;

  void accept();
  void broadcast(std::shared_ptr<const std::string> text);
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Server::Impl* server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send(std::shared_ptr<const std::string> text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_->sessions.push_back(weak_from_this());
    json snap = mission::to_json(server_->svc.snapshot());
    snap["type"] = "snapshot";
    send(std::make_shared<const std::string>(snap.dump(-1, ' ', false, json::error_handler_t::replace)));
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl* server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Server::Impl* server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      const std::string target(req_.target());
      if (target == "/stream" || target.starts_with("/stream?")) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
        return;
      }
    }

    const Response r = handle(server_->svc, std::string(req_.method_string()), std::string(req_.target()), req_.body());
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status),
                                                                   req_.version());
    res->set(http::field::server, "fireline");
    res->set(http::field::access_control_allow_origin, "*");
    res->set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
    res->set(http::field::access_control_allow_headers, "Content-Type");
    if (!r.body.is_null()) {
      res->set(http::field::content_type, "application/json");
      res->body() = r.body.dump(-1, ' ', false, json::error_handler_t::replace);
    }
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Server::Impl* server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

void Server::Impl::accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket s) {
    if (!acceptor.is_open()) return;
    if (!ec) std::make_shared<HttpSession>(std::move(s), this)->run();
    accept();
  });
}

void Server::Impl::broadcast(std::shared_ptr<const std::string> text) {
  asio::post(ioc, [this, text] {
    std::erase_if(sessions, [](const auto& w) { return w.expired(); });
    for (auto& w : sessions) {
      if (auto s = w.lock()) s->send(text);
    }
  });
}

Server::Server(mission::MissionService& svc, Endpoint endpoint)
    : impl_(std::make_unique<Impl>(svc, std::move(endpoint))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running) return;
  const tcp::endpoint ep(asio::ip::make_address(impl_->endpoint.host), impl_->endpoint.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen(asio::socket_base::max_listen_connections);
  impl_->running = true;

  Impl* impl = impl_.get();
  impl->svc.set_listener([impl](const json& msg) {
    impl->broadcast(std::make_shared<const std::string>(msg.dump(-1, ' ', false, json::error_handler_t::replace)));
  });
  impl->accept();
  impl->thread = std::thread([impl] { impl->ioc.run(); });
}

void Server::stop() {
  if (!impl_->running) return;
  impl_->running = false;
  impl_->svc.set_listener(nullptr);
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
  });
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace fireline::api
