// ======================================================================== //
// Copyright 2026 The tetvol Authors                                        //
//                                                                          //
// Licensed under the Apache License, Version 2.0 (the "License");          //
// you may not use this file except in compliance with the License.         //
// You may obtain a copy of the License at                                  //
//                                                                          //
//     http://www.apache.org/licenses/LICENSE-2.0                           //
//                                                                          //
// Unless required by applicable law or agreed to in writing, software      //
// distributed under the License is distributed on an "AS IS" BASIS,        //
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. //
// See the License for the specific language governing permissions and      //
// limitations under the License.                                           //
// ======================================================================== //

#pragma once

#include "tetvol/viewer/session.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <deque>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

namespace tetvol::viewer {

  namespace net       = boost::asio;
  namespace beast     = boost::beast;
  namespace websocket = boost::beast::websocket;
  using tcp           = boost::asio::ip::tcp;

  /// WebSocket front end for a ViewerSession. One io thread owns all sockets; one render
  /// worker owns the session. Incoming messages queue up while a frame renders and are
  /// then applied as a batch in arrival order, followed by a single frame for the latest
  /// state (broadcast to every connected client).
  class ViewerServer {
  public:
    ViewerServer(ViewerSession session, const std::string &host, unsigned short port)
        : session_(std::move(session)), acceptor_(ioc_)
    {
      const tcp::endpoint ep(net::ip::make_address(host), port);
      acceptor_.open(ep.protocol());
      acceptor_.set_option(net::socket_base::reuse_address(true));
      acceptor_.bind(ep);
      acceptor_.listen();
    }

    ViewerServer(const ViewerServer &)            = delete;
    ViewerServer &operator=(const ViewerServer &) = delete;
    ~ViewerServer() { stop(); }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void start()
    {
      do_accept();
      io_thread_     = std::thread([this] { ioc_.run(); });
      worker_thread_ = std::thread([this] { worker_loop(); });
    }

    /// Blocks until stop() is called from elsewhere.
    void wait()
    {
      if (io_thread_.joinable()) io_thread_.join();
      if (worker_thread_.joinable()) worker_thread_.join();
    }

    void stop()
    {
      {
        std::lock_guard lock(mutex_);
        stopping_ = true;
      }
      cv_.notify_all();
      ioc_.stop();
      wait();
    }

  private:
    struct Connection : std::enable_shared_from_this<Connection> {
      Connection(tcp::socket socket, ViewerServer &server) : ws(std::move(socket)), server(server) {}

      void start()
      {
        ws.binary(true);
        ws.async_accept([self = shared_from_this()](beast::error_code ec) {
          if (ec) return;
          self->server.connections_.push_back(self);
          self->do_read();
        });
      }

      void do_read()
      {
        ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
          if (ec) {
            self->closed = true;
            return;
          }
          const auto data = self->buffer.data();
          std::vector<std::uint8_t> bytes(static_cast<const std::uint8_t *>(data.data()),
                                          static_cast<const std::uint8_t *>(data.data()) + data.size());
          self->buffer.consume(self->buffer.size());
          self->server.enqueue(self, std::move(bytes));
          self->do_read();
        });
      }

      // io thread only
      void send(std::shared_ptr<const std::vector<std::uint8_t>> bytes)
      {
        if (closed) return;
        outbox.push_back(std::move(bytes));
        if (outbox.size() == 1) do_write();
      }

      void do_write()
      {
        ws.async_write(net::buffer(*outbox.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
          if (ec) {
            self->closed = true;
            self->outbox.clear();
            return;
          }
          self->outbox.pop_front();
          if (!self->outbox.empty()) self->do_write();
        });
      }

      websocket::stream<tcp::socket>                                ws;
      beast::flat_buffer                                            buffer;
      std::deque<std::shared_ptr<const std::vector<std::uint8_t>>> outbox;
      ViewerServer                                                 &server;
      bool                                                          closed = false;
    };

    struct Pending {
      std::weak_ptr<Connection> from;
      std::vector<std::uint8_t> bytes;
    };

    void do_accept()
    {
      acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<Connection>(std::move(socket), *this)->start();
        do_accept();
      });
    }

    void enqueue(const std::shared_ptr<Connection> &from, std::vector<std::uint8_t> bytes)
    {
      {
        std::lock_guard lock(mutex_);
        pending_.push_back({from, std::move(bytes)});
      }
      cv_.notify_one();
    }

    void send_to(std::weak_ptr<Connection> to, std::vector<std::uint8_t> bytes)
    {
      auto shared = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
      net::post(ioc_, [to = std::move(to), shared] {
        if (auto c = to.lock()) c->send(shared);
      });
    }

    void broadcast(std::vector<std::uint8_t> bytes)
    {
      auto shared = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
      net::post(ioc_, [this, shared] {
        std::erase_if(connections_, [](const std::weak_ptr<Connection> &w) {
          auto c = w.lock();
          return !c || c->closed;
        });
        for (auto &w : connections_)
          if (auto c = w.lock()) c->send(shared);
      });
    }

    void worker_loop()
    {
      for (;;) {
        std::deque<Pending> batch;
        {
          std::unique_lock lock(mutex_);
          cv_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
          if (stopping_) return;
          batch.swap(pending_);
        }
        bool render_due = false;
        for (Pending &p : batch) {
          Outcome out;
          try {
            out = session_.apply(decode_client_message(p.bytes));
          } catch (const ProtocolError &e) {
            send_to(p.from, encode_error(e.what()));
            continue;
          }
          if (out.error) send_to(p.from, encode_error(*out.error));
          if (out.reply) send_to(p.from, encode_json(Tag::Control, *out.reply));
          render_due = render_due || out.changed || out.frame_requested;
        }
        if (!render_due) continue;
        try {
          broadcast(encode_frame(session_.render_frame()));
        } catch (const std::exception &e) {
          broadcast(encode_error(std::string("render failed: ") + e.what()));
        }
      }
    }

    ViewerSession                          session_;
    net::io_context                        ioc_;
    tcp::acceptor                          acceptor_;
    std::vector<std::weak_ptr<Connection>> connections_; // io thread only
    std::thread                            io_thread_, worker_thread_;
    std::mutex                             mutex_;
    std::condition_variable                cv_;
    std::deque<Pending>                    pending_;
    bool                                   stopping_ = false;
  };

} // namespace tetvol::viewer
