// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/approval.hpp"

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::agent {

std::string_view to_string(ApprovalStatus s) {
  switch (s) {
    case ApprovalStatus::Pending: return "pending";
    case ApprovalStatus::Approved: return "approved";
    case ApprovalStatus::Rejected: return "rejected";
  }
  return "?";
}

ApprovalStatus approval_status_from_string(std::string_view name) {
  for (auto s : {ApprovalStatus::Pending, ApprovalStatus::Approved, ApprovalStatus::Rejected}) {
    if (to_string(s) == name) return s;
  }
  throw MisuseError("unknown approval status '" + std::string(name) + "'");
}

std::string ApprovalRegistry::submit(std::string session_id, std::string script, std::string intent,
                                     double requested_at_s) {
  if (trim(script).empty()) throw MisuseError("approval request needs a script");
  ApprovalRequest copy;
  {
    std::lock_guard lock(mu_);
    ApprovalRequest r;
    r.id = "r-" + std::to_string(next_++);
    r.session_id = std::move(session_id);
    r.script = std::move(script);
    r.intent = std::move(intent);
    r.requested_at_s = requested_at_s;
    requests_.push_back(r);
    copy = std::move(r);
  }
  notify(copy);
  return copy.id;
}

ApprovalRequest& ApprovalRegistry::find_locked(std::string_view id) {
  for (auto& r : requests_) {
    if (r.id == id) return r;
  }
  throw NotFoundError("approval request " + std::string(id) + " not found");
}

ApprovalRequest ApprovalRegistry::decide(std::string_view id, bool approve, std::string decider,
                                         double decided_at_s) {
  if (trim(decider).empty()) throw MisuseError("decider identity must be non-empty");
  ApprovalRequest copy;
  {
    std::lock_guard lock(mu_);
    auto& r = find_locked(id);
    if (r.status != ApprovalStatus::Pending) {
      throw ConflictError("approval request " + r.id + " already " +
                          std::string(to_string(r.status)));
    }
    r.status = approve ? ApprovalStatus::Approved : ApprovalStatus::Rejected;
    r.decider = std::move(decider);
    r.decided_at_s = decided_at_s;
    copy = r;
  }
  cv_.notify_all();
  notify(copy);
  return copy;
}

ApprovalRequest ApprovalRegistry::await(std::string_view id, std::chrono::milliseconds wall_timeout,
                                        double timeout_at_s) {
  ApprovalRequest copy;
  bool timed_out = false;
  {
    std::unique_lock lock(mu_);
    find_locked(id);
    const auto decided = [&] { return find_locked(id).status != ApprovalStatus::Pending; };
    if (!cv_.wait_for(lock, wall_timeout, decided)) {
      auto& r = find_locked(id);
      r.status = ApprovalStatus::Rejected;
      r.decider = "timeout";
      r.decided_at_s = timeout_at_s;
      timed_out = true;
    }
    copy = find_locked(id);
  }
  if (timed_out) {
    cv_.notify_all();
    notify(copy);
  }
  return copy;
}

ApprovalRequest ApprovalRegistry::get(std::string_view id) const {
  std::lock_guard lock(mu_);
  return const_cast<ApprovalRegistry*>(this)->find_locked(id);
}

std::vector<ApprovalRequest> ApprovalRegistry::list(std::optional<ApprovalStatus> status) const {
  std::lock_guard lock(mu_);
  std::vector<ApprovalRequest> out;
  for (const auto& r : requests_) {
    if (!status || r.status == *status) out.push_back(r);
  }
  return out;
}

void ApprovalRegistry::add_listener(Listener listener) {
  std::lock_guard lock(mu_);
  listeners_.push_back(std::move(listener));
}

void ApprovalRegistry::notify(const ApprovalRequest& r) {
  std::vector<Listener> ls;
  {
    std::lock_guard lock(mu_);
    ls = listeners_;
  }
  for (const auto& l : ls) l(r);
}

}  // namespace cdiag::agent
