// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/drill.hpp"

#include "cdiag/common/error.hpp"

namespace cdiag::agent {

perf::WorkloadMix calibrated_drill_mix(const sim::Cluster& cluster, const DrillPlan& plan) {
  const auto* gpu = cluster.topology().find_gpu(plan.gpu);
  if (!gpu) throw NotFoundError("drill gpu " + plan.gpu + " not in topology");
  const auto base = cluster.nominal_gpu_profile(plan.gpu);
  const auto degraded =
      base.scaled(perf::ResourceKind::Compute, plan.throttle_mhz / gpu->nominal_mhz);
  return perf::calibrate_mix_for_ratio(base, degraded, plan.target_ratio, cluster.config().rules);
}

sim::JobSpec drill_job(const sim::Cluster& cluster, const DrillPlan& plan) {
  const auto* server = cluster.topology().server_of_gpu(plan.gpu);
  if (!server) throw NotFoundError("drill gpu " + plan.gpu + " not in topology");
  std::vector<std::string> gpus;
  for (const auto& g : server->gpus) gpus.push_back(g.id);
  return {plan.job_id, calibrated_drill_mix(cluster, plan), std::move(gpus), plan.iterations,
          std::nullopt};
}

sim::FaultSpec drill_fault(const sim::Cluster& cluster, const DrillPlan& plan) {
  return {sim::FaultKind::GpuFrequencyThrottle, plan.gpu, plan.throttle_mhz, cluster.now()};
}

}  // namespace cdiag::agent
