// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0

// Linked into every test binary: after all tests ran, no script may have
// executed without an approved request.

#include <gtest/gtest.h>

#include "cdiag/agent/session.hpp"

namespace {

class AuditGuard : public ::testing::Environment {
 public:
  void TearDown() override {
    const auto bad = cdiag::agent::execution_audit().unapproved_script_executions();
    for (const auto& e : bad) {
      ADD_FAILURE() << "unapproved script execution: session " << e.session_id << " "
                    << e.invocation_id << " (" << e.approval_status << ")";
    }
  }
};

[[maybe_unused]] auto* const kGuard = ::testing::AddGlobalTestEnvironment(new AuditGuard);

}  // namespace
