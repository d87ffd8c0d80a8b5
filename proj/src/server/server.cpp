#include "duel/server/server.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <csignal>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <system_error>
#include <thread>

#include "duel/server/session.hpp"
#include "json.hpp"

namespace duel::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr const char* kStubPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>duel</title></head>
<body><h1>duel server</h1>
<p>No cockpit bundle configured (server.ui_dir). Connect a WebSocket client
to <code>/ws</code> and send <code>{"protocol":1,"type":"join","role":"driver"}</code>.</p>
</body></html>
)";

std::string MimeType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, SessionHub& hub)
      : ws_(std::move(socket)), hub_(hub) {}

  ~WsConnection() {
    if (id_) hub_.Close(*id_);
  }

  void Run(http::request<http::string_body> req) {
    ws_.read_message_max(kMaxMessageBytes);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::OnAccept,
                                                    shared_from_this()));
  }

 private:
  void OnAccept(beast::error_code ec) {
    if (ec) return;
    outbox_ = std::make_shared<Outbox>();
    std::weak_ptr<WsConnection> weak = weak_from_this();
    outbox_->SetNotify([weak] {
      if (auto self = weak.lock())
        net::post(self->ws_.get_executor(), [self] { self->Flush(); });
    });
    id_ = hub_.Open(outbox_);
    Read();
  }

  void Read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::OnRead,
                                                      shared_from_this()));
  }

  void OnRead(beast::error_code ec, std::size_t) {
    if (ec) {  // closed, reset or oversize frame: drop the client
      if (id_) hub_.Close(*id_);
      id_.reset();
      return;
    }
    std::string text = ws_.got_text() ? beast::buffers_to_string(buffer_.data()) : "";
    buffer_.consume(buffer_.size());
    hub_.Receive(*id_, std::move(text));
    if (!closing_) Read();
  }

  void Flush() {
    if (writing_ || closing_) return;
    if (auto message = outbox_->Pop()) {
      writing_ = true;
      current_ = std::move(*message);
      ws_.text(true);
      ws_.async_write(net::buffer(current_),
                      beast::bind_front_handler(&WsConnection::OnWrite, shared_from_this()));
      return;
    }
    if (outbox_->closed()) {
      closing_ = true;
      ws_.async_close(websocket::close_code::policy_error,
                      [self = shared_from_this()](beast::error_code) {});
    }
  }

  void OnWrite(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) return;
    Flush();
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionHub& hub_;
  beast::flat_buffer buffer_;
  std::shared_ptr<Outbox> outbox_;
  std::optional<ClientId> id_;
  std::string current_;
  bool writing_ = false;
  bool closing_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, SessionHub& hub, const ServerOptions& options)
      : stream_(std::move(socket)), hub_(hub), options_(options) {}

  void Run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpConnection::Read, shared_from_this()));
  }

 private:
  void Read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpConnection::OnRead, shared_from_this()));
  }

  void OnRead(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_) && Path() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), hub_)->Run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(Respond());
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (res->need_eof()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                          return;
                        }
                        self->Read();
                      });
  }

  std::string Path() const {
    std::string target(req_.target());
    return target.substr(0, target.find('?'));
  }

  http::response<http::string_body> Reply(http::status status, std::string body,
                                          const std::string& type) const {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::server, "duel");
    res.set(http::field::content_type, type);
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> Respond() const {
    if (req_.method() != http::verb::get)
      return Reply(http::status::method_not_allowed, "GET only\n", "text/plain");
    const std::string path = Path();
    if (path == "/health") {
      nlohmann::json j{{"status", "ok"}, {"protocol", kProtocolVersion},
                       {"sessions", hub_.session_count()}};
      return Reply(http::status::ok, j.dump(), "application/json");
    }
    if (path == "/ws")
      return Reply(http::status::upgrade_required, "WebSocket endpoint\n", "text/plain");
    if (path.empty() || path[0] != '/' || path.find("..") != std::string::npos)
      return Reply(http::status::bad_request, "bad path\n", "text/plain");
    std::filesystem::path rel = path == "/" ? "index.html" : path.substr(1);
    if (options_.ui_dir.empty()) {
      if (rel == "index.html") return Reply(http::status::ok, kStubPage, "text/html; charset=utf-8");
      return Reply(http::status::not_found, "not found\n", "text/plain");
    }
    const std::filesystem::path file = options_.ui_dir / rel;
    std::ifstream in(file, std::ios::binary);
    if (!in || std::filesystem::is_directory(file))
      return Reply(http::status::not_found, "not found\n", "text/plain");
    std::ostringstream body;
    body << in.rdbuf();
    return Reply(http::status::ok, body.str(), MimeType(file));
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  SessionHub& hub_;
  const ServerOptions& options_;
};

}  // namespace

struct Server::Impl {
  Impl(AppConfig c, std::filesystem::path logs)
      : config(c), hub(std::move(c), std::move(logs)), acceptor(ioc) {}

  void Accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        std::make_shared<HttpConnection>(std::move(s), hub, config.server)->Run();
      }
      Accept();
    });
  }

  AppConfig config;
  SessionHub hub;  // outlives every connection handler
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::mutex mu;
  std::condition_variable cv;
  bool stopped = false;
};

Server::Server(AppConfig config, std::filesystem::path log_dir)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(log_dir))) {}

Server::~Server() { Stop(); }

void Server::Start() {
  const auto& opts = impl_->config.server;
  const tcp::endpoint endpoint(net::ip::make_address(opts.bind_address),
                               static_cast<unsigned short>(opts.port));
  auto& acc = impl_->acceptor;
  try {
    acc.open(endpoint.protocol());
    acc.set_option(net::socket_base::reuse_address(true));
    acc.bind(endpoint);
    acc.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    if (acc.is_open()) acc.close();
    throw std::system_error(e.code().value(), std::generic_category(),
                            "cannot listen on " + opts.bind_address + ":" +
                                std::to_string(opts.port));
  }
  impl_->Accept();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::Wait() {
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([this](beast::error_code ec, int) {
    if (ec) return;
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
    impl_->cv.notify_all();
  });
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [&] { return impl_->stopped; });
  lock.unlock();
  signals.cancel();
  Stop();
}

void Server::Stop() {
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
    impl_->cv.notify_all();
  }
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  impl_->hub.Stop();
}

}  // namespace duel::server
