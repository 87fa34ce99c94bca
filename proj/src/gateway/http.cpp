// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/gateway/http.hpp"

#include <atomic>
#include <thread>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "httplib.h"

namespace cdiag::gateway {

using nlohmann::json;

namespace {

constexpr auto kPollWait = std::chrono::milliseconds(200);
constexpr int kKeepaliveEvery = 50;  // poll waits

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

json body_of(const httplib::Request& req) {
  if (trim(req.body).empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw MisuseError(std::string("malformed JSON body: ") + e.what());
  }
}

template <typename F>
httplib::Server::Handler guarded(F fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const MisuseError& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}

  void routes();
  void stream_events(httplib::Response& res);

  Service& service;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
  bool bound = false;
};

void HttpServer::Impl::routes() {
  server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, service.health());
             }));
  server.Get("/telemetry", guarded([this](const httplib::Request& req, httplib::Response& res) {
               double window = 60;
               if (req.has_param("window")) {
                 const auto w = parse_double(req.get_param_value("window"));
                 if (!w) throw MisuseError("window must be a number of seconds");
                 window = *w;
               }
               send_json(res, 200, service.telemetry(window));
             }));
  server.Get("/alerts", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, service.alerts());
             }));
  server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, service.sessions());
             }));
  server.Get(R"(/sessions/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, service.session(req.matches[1].str()));
             }));
  server.Get("/approvals", guarded([this](const httplib::Request& req, httplib::Response& res) {
               std::optional<agent::ApprovalStatus> status;
               if (req.has_param("status")) {
                 status = agent::approval_status_from_string(req.get_param_value("status"));
               }
               send_json(res, 200, service.approvals(status));
             }));
  server.Post(R"(/approvals/([^/]+)/decision)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const json body = body_of(req);
                const std::string decision = body.value("decision", "");
                if (decision != "approve" && decision != "reject") {
                  throw MisuseError("decision must be \"approve\" or \"reject\"");
                }
                std::string decider = body.value("decider", "");
                if (decider.empty()) decider = req.get_header_value(kDeciderHeader);
                send_json(res, 200,
                          service.decide(req.matches[1].str(), decision == "approve", decider));
              }));
  server.Post("/faults", guarded([this](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 201, service.inject(body_of(req)));
              }));
  server.Post("/bench/run", guarded([this](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, service.run_bench(body_of(req)));
              }));
  server.Get("/events",
             [this](const httplib::Request&, httplib::Response& res) { stream_events(res); });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
    } else {
      send_error(res, res.status, "error", "request failed");
    }
  });
}

void HttpServer::Impl::stream_events(httplib::Response& res) {
  auto sub = service.subscribe();
  res.set_header("Cache-Control", "no-cache");
  auto opened = std::make_shared<bool>(false);
  auto idle = std::make_shared<int>(0);
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, sub, opened, idle](std::size_t, httplib::DataSink& sink) {
        if (!*opened) {
          *opened = true;
          const std::string hello = ": subscribed\n\n";
          return sink.write(hello.data(), hello.size());
        }
        if (stopping || !sink.is_writable()) {
          sub->close();
          sink.done();
          return true;
        }
        if (auto e = sub->next(kPollWait)) {
          *idle = 0;
          const std::string frame = sse_frame(*e);
          return sink.write(frame.data(), frame.size());
        }
        switch (sub->state()) {
          case StreamState::Overflowed: {
            const std::string frame =
                "event: error\ndata: " +
                json{{"code", "overflow"},
                     {"message", "event buffer overflowed; re-sync with GET and reconnect"}}
                    .dump() +
                "\n\n";
            sink.write(frame.data(), frame.size());
            sink.done();
            return true;
          }
          case StreamState::Closed: sink.done(); return true;
          case StreamState::Open: break;
        }
        if (++*idle >= kKeepaliveEvery) {
          *idle = 0;
          const std::string ping = ": keepalive\n\n";
          return sink.write(ping.data(), ping.size());
        }
        return true;
      },
      [sub](bool) { sub->close(); });
}

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  // Address reuse only: the default SO_REUSEPORT would let a second server
  // share a busy port instead of failing.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("cannot bind " + host + " to a free port");
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void HttpServer::start() {
  if (!impl_->bound) throw MisuseError("bind before start");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::serve() {
  if (!impl_->bound) throw MisuseError("bind before serve");
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace cdiag::gateway
