// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/gateway/events.hpp"

#include <algorithm>

namespace cdiag::gateway {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::AlertRaised: return "AlertRaised";
    case EventKind::SessionUpdated: return "SessionUpdated";
    case EventKind::ApprovalRequested: return "ApprovalRequested";
    case EventKind::ApprovalDecided: return "ApprovalDecided";
    case EventKind::VerdictIssued: return "VerdictIssued";
    case EventKind::TelemetryPage: return "TelemetryPage";
  }
  return "Unknown";
}

nlohmann::json to_json(const EventEnvelope& e) {
  return {{"seq", e.seq}, {"kind", std::string(to_string(e.kind))}, {"payload", e.payload}};
}

std::string sse_frame(const EventEnvelope& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + std::string(to_string(e.kind)) +
         "\ndata: " + to_json(e).dump() + "\n\n";
}

std::optional<EventEnvelope> Subscription::next(std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return !queue_.empty() || state_ != StreamState::Open; });
  // An overflowed stream delivers nothing more: the queue no longer holds a
  // gapless run.
  if (queue_.empty() || state_ == StreamState::Overflowed) return std::nullopt;
  EventEnvelope e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

StreamState Subscription::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    if (state_ == StreamState::Open) state_ = StreamState::Closed;
  }
  cv_.notify_all();
}

void Subscription::push(const EventEnvelope& e) {
  {
    std::lock_guard lock(mu_);
    if (state_ != StreamState::Open) return;
    if (queue_.size() >= capacity_) {
      state_ = StreamState::Overflowed;
      queue_.clear();
    } else {
      queue_.push_back(e);
    }
  }
  cv_.notify_all();
}

std::uint64_t EventBus::publish(EventKind kind, nlohmann::json payload) {
  std::lock_guard lock(mu_);
  EventEnvelope e{++seq_, kind, std::move(payload)};
  subs_.erase(std::remove_if(subs_.begin(), subs_.end(), [](const auto& w) { return w.expired(); }),
              subs_.end());
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->push(e);
  }
  recent_.push_back(std::move(e));
  if (recent_.size() > keep) recent_.pop_front();
  return seq_;
}

std::shared_ptr<Subscription> EventBus::subscribe(std::size_t capacity) {
  auto s = std::make_shared<Subscription>(std::max<std::size_t>(capacity, 1));
  std::lock_guard lock(mu_);
  subs_.push_back(s);
  return s;
}

void EventBus::shutdown() {
  std::lock_guard lock(mu_);
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->close();
  }
  subs_.clear();
}

std::uint64_t EventBus::last_seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

std::vector<EventEnvelope> EventBus::recent() const {
  std::lock_guard lock(mu_);
  return {recent_.begin(), recent_.end()};
}

}  // namespace cdiag::gateway
