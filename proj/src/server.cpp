#include "snakesynth/server.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>

namespace snakesynth {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

using Clock = std::chrono::steady_clock;

struct Shared {
  const ClipBank* bank;
  GridSpec spec;
  ServerConfig config;
  Clock::time_point epoch = Clock::now();
  std::atomic<std::size_t> sessions{0};

  double now() const { return std::chrono::duration<double>(Clock::now() - epoch).count(); }
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<Shared> shared, std::string id)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        shared_(std::move(shared)),
        session_(*shared_->bank, shared_->spec, shared_->config.session, std::move(id)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    for (std::string& m : session_.open()) send(std::move(m));
    read();
    tick();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return shutdown();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    SessionReply reply = session_.handle(text);
    for (std::string& m : reply.messages) send(std::move(m));
    if (reply.close) {
      closing_ = true;
      if (!writing_) close();
      return;
    }
    read();
  }

  // Half a block between pumps keeps the lookahead filled.
  void tick() {
    if (closed_) return;
    const auto period = std::chrono::microseconds(static_cast<long long>(
        5e5 * static_cast<double>(shared_->config.session.block) / shared_->config.session.sample_rate));
    timer_.expires_after(period);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_ || self->closing_) return;
      for (std::string& m : self->session_.pump(self->shared_->now())) self->send(std::move(m));
      self->tick();
    });
  }

  void send(std::string message) {
    if (closed_) return;
    outbox_.push_back(std::move(message));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty()) {
      writing_ = false;
      if (closing_) close();
      return;
    }
    writing_ = true;
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->shutdown();
      self->outbox_.pop_front();
      self->write_next();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
  }

  void shutdown() {
    closed_ = true;
    timer_.cancel();
    outbox_.clear();
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Shared> shared_;
  Session session_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/session") return respond(http::status::not_found, "text/plain", "no such endpoint\n");
      const std::size_t n = ++shared_->sessions;
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), shared_, "s" + std::to_string(n))->run(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return respond(http::status::method_not_allowed, "text/plain", "method not allowed\n");
    }
    const std::string target(req_.target());
    if (target == "/" || target == "/index.html") {
      const std::string& page = shared_->config.index_html;
      return respond(http::status::ok, "text/html; charset=utf-8", page.empty() ? default_index_html() : page);
    }
    if (target == shared_->config.session.mosaic_route) {
      const auto& pgm = shared_->config.mosaic_pgm;
      return respond(http::status::ok, "image/x-portable-graymap", std::string(pgm.begin(), pgm.end()));
    }
    respond(http::status::not_found, "text/plain", "not found\n");
  }

  void respond(http::status status, std::string_view type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res->set(http::field::cache_control, "no-store");
    res->keep_alive(req_.keep_alive());
    const std::size_t length = body.size();
    if (req_.method() != http::verb::head) res->body() = std::move(body);
    res->content_length(length);
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<Shared> shared_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<Shared> shared;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool running = false;

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec == asio::error::operation_aborted || !acceptor.is_open()) return;
      if (!ec) std::make_shared<HttpSession>(std::move(socket), shared)->run();
      accept();
    });
  }
};

Server::Server(const ClipBank& bank, GridSpec spec, ServerConfig config) : impl_(std::make_unique<Impl>()) {
  if (bank.n() != spec.n) throw std::invalid_argument("clip bank and grid sizes differ");
  if (config.threads < 1) throw std::invalid_argument("server needs at least one thread");
  impl_->shared = std::make_shared<Shared>();
  impl_->shared->bank = &bank;
  impl_->shared->spec = spec;
  impl_->shared->config = std::move(config);
}

Server::~Server() { stop(); }

void Server::start() {
  std::lock_guard lock(impl_->mutex);
  if (impl_->running) return;
  const ServerConfig& cfg = impl_->shared->config;
  const tcp::endpoint endpoint(asio::ip::make_address(cfg.address), cfg.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(asio::socket_base::max_listen_connections);
  impl_->accept();
  for (int k = 0; k < cfg.threads; ++k) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  impl_->running = true;
}

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return !impl_->running; });
}

void Server::stop() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(impl_->mutex);
    if (!impl_->running) return;
    impl_->running = false;
    threads.swap(impl_->threads);
  }
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
  for (std::thread& t : threads) t.join();
  impl_->stopped_cv.notify_all();
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t Server::sessions_opened() const { return impl_->shared->sessions.load(); }

std::string default_index_html() {
  return "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>snakesynth</title></head>\n"
         "<body><p>Session endpoint: <code>/session</code> (WebSocket). Mosaic: <a href=\"/mosaic.pgm\">/mosaic.pgm</a>"
         "</p></body></html>\n";
}

}  // namespace snakesynth
