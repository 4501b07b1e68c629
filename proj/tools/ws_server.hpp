#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace lvtool {

// WebSocket endpoint: every connection gets its own engine session, driven by
// that connection's thread. Incoming frames already waiting on the socket are
// drained and handled as one batch so stale pointer moves can be dropped.
class WsServer {
 public:
  // Loads the config once up front so a bad config fails before listening.
  WsServer(std::string config_path, unsigned short port, std::ostream& log);
  ~WsServer();

  unsigned short port() const noexcept { return port_; }

  // Accepts until stop() (or SIGINT/SIGTERM when enabled).
  void run(bool handle_signals = false);
  void stop();

 private:
  using Socket = boost::asio::ip::tcp::socket;
  using Stream = boost::beast::websocket::stream<Socket>;

  void accept_next();
  void serve_connection(std::shared_ptr<Stream> ws);

  std::string config_path_;
  std::ostream& log_;
  std::mutex log_mutex_;
  boost::asio::io_context ioc_;
  boost::asio::ip::tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::atomic<bool> stopping_{false};

  std::mutex conn_mutex_;
  std::vector<std::thread> threads_;
  std::vector<std::weak_ptr<Stream>> streams_;
};

}  // namespace lvtool
