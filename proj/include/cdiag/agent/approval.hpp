// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Human review of agent-authored scripts. A request moves Pending -> Approved
// or Pending -> Rejected exactly once; a waiter that times out rejects it with
// decider "timeout".

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cdiag::agent {

enum class ApprovalStatus { Pending, Approved, Rejected };

std::string_view to_string(ApprovalStatus s);
ApprovalStatus approval_status_from_string(std::string_view name);

struct ApprovalRequest {
  std::string id;
  std::string session_id;
  std::string script;
  std::string intent;
  ApprovalStatus status = ApprovalStatus::Pending;
  std::string decider;
  double requested_at_s = 0;
  std::optional<double> decided_at_s;
  bool operator==(const ApprovalRequest&) const = default;
};

class ApprovalRegistry {
 public:
  /// Called outside the registry lock after every submit and decision.
  using Listener = std::function<void(const ApprovalRequest&)>;

  std::string submit(std::string session_id, std::string script, std::string intent,
                     double requested_at_s);

  /// NotFoundError for unknown ids, ConflictError when already decided,
  /// MisuseError for an empty decider.
  ApprovalRequest decide(std::string_view id, bool approve, std::string decider,
                         double decided_at_s);

  /// Blocks until decided or until `wall_timeout` passes, in which case the
  /// request is rejected with decider "timeout" at `timeout_at_s`.
  ApprovalRequest await(std::string_view id, std::chrono::milliseconds wall_timeout,
                        double timeout_at_s);

  ApprovalRequest get(std::string_view id) const;
  std::vector<ApprovalRequest> list(std::optional<ApprovalStatus> status = std::nullopt) const;

  void add_listener(Listener listener);

 private:
  ApprovalRequest& find_locked(std::string_view id);
  void notify(const ApprovalRequest& r);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ = 1;
  std::vector<ApprovalRequest> requests_;
  std::vector<Listener> listeners_;
};

}  // namespace cdiag::agent
