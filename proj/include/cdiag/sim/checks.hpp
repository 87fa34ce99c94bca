// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Hardware test registry. Each capability (gpu-matmul, gpu-membw, rdma-rw,
// storage-rw, gpu-freq) runs in one of three dimensions. Checks only read
// cluster state; stability probes sample projected state over the following
// minutes of simulated time without advancing the clock.

#include <string>
#include <string_view>
#include <vector>

#include "cdiag/sim/cluster.hpp"

namespace cdiag::sim {

enum class Dimension { Correctness, Performance, Stability };

std::string_view to_string(Dimension d);
Dimension dimension_from_string(std::string_view name);

struct CheckInfo {
  std::string capability;
  Dimension dimension;
  std::string description;
  std::string expected_bound;
};

/// Stable order: capability-major, then dimension.
const std::vector<CheckInfo>& list_checks();
const std::vector<std::string>& capability_names();

/// Names the agent may invoke as tools: every capability plus "telemetry".
const std::vector<std::string>& tool_names();
bool is_registered_tool(std::string_view name);

struct CheckOptions {
  std::vector<std::string> targets;  // gpu or server ids; empty means all
  double threshold = 0.9;
  int stability_repeats = 5;
  double stability_interval_s = 60;
  double membw_buffer_bytes = 8e9;
  double storage_probe_bytes = 100e9;
};

struct CheckResult {
  std::string capability;
  Dimension dimension = Dimension::Performance;
  bool pass = true;
  double measured = 0;  // worst device
  double expected = 0;
  std::string unit;
  std::string evidence;
  std::vector<std::string> failing_devices;
};

/// Throws NotFoundError for unknown capabilities or targets.
CheckResult run_check(const Cluster& cluster, std::string_view capability, Dimension dimension,
                      const CheckOptions& options = {});

}  // namespace cdiag::sim
