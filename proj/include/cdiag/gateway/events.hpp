// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Broadcast of service events. Sequence numbers are global and consecutive,
// so a subscriber sees a gapless run starting at its first event. A
// subscriber that falls `capacity` events behind is closed as overflowed and
// must re-sync through the GET endpoints.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cdiag::gateway {

enum class EventKind {
  AlertRaised,
  SessionUpdated,
  ApprovalRequested,
  ApprovalDecided,
  VerdictIssued,
  TelemetryPage
};

std::string_view to_string(EventKind k);

struct EventEnvelope {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::AlertRaised;
  nlohmann::json payload;
};

nlohmann::json to_json(const EventEnvelope& e);
/// "id: <seq>\nevent: <kind>\ndata: <envelope json>\n\n"
std::string sse_frame(const EventEnvelope& e);

enum class StreamState { Open, Overflowed, Closed };

class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  /// Next event, or nullopt on timeout or once the stream is not Open and
  /// drained.
  std::optional<EventEnvelope> next(std::chrono::milliseconds wait);
  StreamState state() const;
  void close();

 private:
  friend class EventBus;
  void push(const EventEnvelope& e);

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<EventEnvelope> queue_;
  StreamState state_ = StreamState::Open;
};

class EventBus {
 public:
  std::uint64_t publish(EventKind kind, nlohmann::json payload);
  std::shared_ptr<Subscription> subscribe(std::size_t capacity);
  /// Closes every subscription.
  void shutdown();
  std::uint64_t last_seq() const;
  /// Events published so far, oldest first (bounded at `keep`).
  std::vector<EventEnvelope> recent() const;

 private:
  mutable std::mutex mu_;
  std::uint64_t seq_ = 0;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::deque<EventEnvelope> recent_;
  static constexpr std::size_t keep = 1024;
};

}  // namespace cdiag::gateway
