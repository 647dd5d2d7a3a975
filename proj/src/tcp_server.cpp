#include "dialogos/tcp_server.hpp"

#include <boost/asio.hpp>

#include <chrono>
#include <deque>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace dialogos {

namespace asio = boost::asio;
using asio::ip::tcp;

TimestampMs now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Hub& hub)
      : socket_(std::move(socket)), hub_(hub), buffer_(kMaxFrameBytes + 1) {}

  void start() {
    std::weak_ptr<Session> weak = shared_from_this();
    auto executor = socket_.get_executor();
    id_ = hub_.connect([weak, executor](const std::string& line) {
      asio::post(executor, [weak, line] {
        if (auto self = weak.lock()) self->write(line);
      });
    });
    read();
  }

 private:
  void read() {
    auto self = shared_from_this();
    asio::async_read_until(socket_, buffer_, '\n',
                           [this, self](boost::system::error_code ec, std::size_t n) {
                             if (ec == asio::error::not_found) {
                               write(R"({"code":"BAD_FRAME","detail":"frame exceeds 64 KiB","t":"error"})"
                                     "\n");
                               closing_ = true;
                               return;
                             }
                             if (ec) {
                               close();
                               return;
                             }
                             std::string line(asio::buffers_begin(buffer_.data()),
                                              asio::buffers_begin(buffer_.data()) + n - 1);
                             buffer_.consume(n);
                             if (!line.empty() && line.back() == '\r') line.pop_back();
                             if (!line.empty()) hub_.receive(id_, line, now_ms());
                             read();
                           });
  }

  void write(const std::string& line) {
    const bool idle = outbox_.empty();
    outbox_.push_back(line);
    if (idle) flush();
  }

  void flush() {
    auto self = shared_from_this();
    asio::async_write(socket_, asio::buffer(outbox_.front()),
                      [this, self](boost::system::error_code ec, std::size_t) {
                        if (ec) {
                          close();
                          return;
                        }
                        outbox_.pop_front();
                        if (!outbox_.empty()) {
                          flush();
                        } else if (closing_) {
                          close();
                        }
                      });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    boost::system::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
    hub_.disconnect(id_, now_ms());
  }

  tcp::socket socket_;
  Hub& hub_;
  asio::streambuf buffer_;
  std::deque<std::string> outbox_;
  ConnectionId id_ = 0;
  bool closing_ = false;
  bool closed_ = false;
};

tcp::endpoint parse_endpoint(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("listen address must be host:port");
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  const int port = std::stoi(address.substr(colon + 1));
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");
  return {asio::ip::make_address(host), static_cast<std::uint16_t>(port)};
}

}  // namespace

struct TcpServer::Impl {
  Impl(Hub& h, const std::string& address) : hub(h), acceptor(io, parse_endpoint(address)) {}

  void accept() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        return;
      }
      spdlog::debug("connection from {}", socket.remote_endpoint(ec).address().to_string());
      std::make_shared<Session>(std::move(socket), hub)->start();
      accept();
    });
  }

  Hub& hub;
  asio::io_context io;
  tcp::acceptor acceptor;
};

TcpServer::TcpServer(Hub& hub, const std::string& address)
    : impl_(std::make_unique<Impl>(hub, address)) {}

TcpServer::~TcpServer() = default;

std::uint16_t TcpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TcpServer::run() {
  impl_->accept();
  impl_->io.run();
}

void TcpServer::stop() { asio::post(impl_->io, [this] { impl_->io.stop(); }); }

}  // namespace dialogos
