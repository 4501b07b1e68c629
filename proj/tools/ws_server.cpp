#include "ws_server.hpp"

#include <csignal>
#include <stdexcept>
#include <string_view>

#include "lv/lv.h"

namespace lvtool {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct SessionHandle {
  lv_session* ptr = nullptr;
  ~SessionHandle() { lv_session_close(ptr); }
};

struct Text {
  char* ptr = nullptr;
  ~Text() { lv_string_free(ptr); }
};

std::vector<std::string_view> lines(const char* text) {
  std::vector<std::string_view> out;
  std::string_view rest(text ? text : "");
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    if (nl == std::string_view::npos) nl = rest.size();
    if (nl > 0) out.push_back(rest.substr(0, nl));
    rest.remove_prefix(std::min(rest.size(), nl + 1));
  }
  return out;
}

}  // namespace

WsServer::WsServer(std::string config_path, unsigned short port, std::ostream& log)
    : config_path_(std::move(config_path)), log_(log), acceptor_(ioc_) {
  SessionHandle probe;
  if (lv_session_open(config_path_.c_str(), &probe.ptr) != LV_OK)
    throw std::runtime_error(std::string("bad config: ") + lv_last_error());

  tcp::endpoint endpoint(tcp::v4(), port);
  acceptor_.open(endpoint.protocol());
  acceptor_.set_option(asio::socket_base::reuse_address(true));
  beast::error_code ec;
  acceptor_.bind(endpoint, ec);
  if (ec) throw std::runtime_error("cannot bind port " + std::to_string(port) + ": " + ec.message());
  acceptor_.listen(asio::socket_base::max_listen_connections);
  port_ = acceptor_.local_endpoint().port();
}

WsServer::~WsServer() {
  stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conn_mutex_);
    threads.swap(threads_);
  }
  for (auto& t : threads)
    if (t.joinable()) t.join();
}

void WsServer::run(bool handle_signals) {
  asio::signal_set signals(ioc_);
  if (handle_signals) {
    signals.add(SIGINT);
    signals.add(SIGTERM);
    signals.async_wait([this](const beast::error_code& ec, int) {
      if (!ec) stop();
    });
  }
  accept_next();
  ioc_.run();
}

void WsServer::stop() {
  if (stopping_.exchange(true)) return;
  asio::post(ioc_, [this] {
    beast::error_code ec;
    acceptor_.close(ec);
    ioc_.stop();
  });
  std::lock_guard lock(conn_mutex_);
  for (auto& weak : streams_) {
    if (auto ws = weak.lock()) {
      beast::error_code ec;
      // Unblocks the connection thread's pending read.
      beast::get_lowest_layer(*ws).shutdown(tcp::socket::shutdown_both, ec);
    }
  }
}

void WsServer::accept_next() {
  acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (!stopping_) {
        std::lock_guard lock(log_mutex_);
        log_ << "accept failed: " << ec.message() << '\n';
      }
      return;
    }
    auto ws = std::make_shared<Stream>(std::move(socket));
    {
      std::lock_guard lock(conn_mutex_);
      streams_.push_back(ws);
      threads_.emplace_back([this, ws] { serve_connection(ws); });
    }
    accept_next();
  });
}

void WsServer::serve_connection(std::shared_ptr<Stream> ws) {
  SessionHandle session;
  try {
    ws->text(true);
    ws->accept();
    if (lv_session_open(config_path_.c_str(), &session.ptr) != LV_OK)
      throw std::runtime_error(lv_last_error());

    auto send = [&](const char* replies) {
      for (auto line : lines(replies)) ws->write(asio::buffer(line.data(), line.size()));
    };
    {
      Text initial;
      if (lv_session_connect(session.ptr, &initial.ptr) != LV_OK) throw std::runtime_error(lv_last_error());
      send(initial.ptr);
    }

    for (;;) {
      std::vector<std::string> batch;
      do {
        beast::flat_buffer buffer;
        ws->read(buffer);
        batch.push_back(beast::buffers_to_string(buffer.data()));
      } while (beast::get_lowest_layer(*ws).available() > 0);

      std::vector<const char*> ptrs;
      for (const auto& m : batch) ptrs.push_back(m.c_str());
      Text replies;
      if (lv_session_handle_batch(session.ptr, ptrs.data(), ptrs.size(), &replies.ptr) != LV_OK)
        throw std::runtime_error(lv_last_error());
      send(replies.ptr);
    }
  } catch (const beast::system_error& e) {
    if (e.code() != websocket::error::closed && !stopping_) {
      std::lock_guard lock(log_mutex_);
      log_ << "connection ended: " << e.code().message() << '\n';
    }
  } catch (const std::exception& e) {
    std::lock_guard lock(log_mutex_);
    log_ << "connection failed: " << e.what() << '\n';
  }
}

}  // namespace lvtool
