// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// The gpu-throttle drill: one gpu clocked down from nominal, and a training
// job on that gpu's server whose two-part workload mix is calibrated so the
// throttled job runs at `target_ratio` of its healthy rate.

#include <string>

#include "cdiag/sim/cluster.hpp"

namespace cdiag::agent {

struct DrillPlan {
  std::string gpu = "gpu-3";
  double throttle_mhz = 200;
  double target_ratio = 1.0 / 3.0;
  std::size_t iterations = 20;
  std::string job_id = "drill-train";
};

perf::WorkloadMix calibrated_drill_mix(const sim::Cluster& cluster, const DrillPlan& plan = {});
/// Every gpu on the drill gpu's server, starting at the current clock.
sim::JobSpec drill_job(const sim::Cluster& cluster, const DrillPlan& plan = {});
/// Throttle with onset at the current clock.
sim::FaultSpec drill_fault(const sim::Cluster& cluster, const DrillPlan& plan = {});

}  // namespace cdiag::agent
