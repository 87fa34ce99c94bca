// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// HTTP routes over a Service. Errors are {"code","message"} with 400
// bad_request, 404 not_found, 409 conflict or 500 internal. /events is a
// server-sent event stream; a subscriber that overflows its buffer gets a
// final "error" event with code "overflow" and the stream ends.

#include <memory>
#include <string>

#include "cdiag/gateway/service.hpp"

namespace cdiag::gateway {

/// Header naming the operator when a decision body has no "decider".
inline constexpr const char* kDeciderHeader = "X-Decider";

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Returns the bound port (a free one when `port` is 0). IoError when the
  /// address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cdiag::gateway
