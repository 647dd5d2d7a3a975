// dialogos/tcp_server.hpp — raw TCP transport for protocol v1.
//
// One io_context thread drives every connection; each complete line is handed
// to the Hub, which serializes all mutations. Lines over kMaxFrameBytes get a
// BAD_FRAME error and the connection is closed.
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dialogos/server.hpp"

namespace dialogos {

TimestampMs now_ms();

class TcpServer {
 public:
  // `address` is host:port; port 0 picks a free port.
  TcpServer(Hub& hub, const std::string& address);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  [[nodiscard]] std::uint16_t port() const;

  // Blocks until stop().
  void run();
  // Thread-safe.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dialogos
