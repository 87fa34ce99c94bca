// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "json.hpp"

#include "cdiag/perf/model.hpp"

// JSON documents for profiles, demands and mixes. Field names:
//   profile: compute_flops_per_s, mem_bytes_per_s, io_bytes_per_s
//   demand:  compute_flops, mem_bytes, io_bytes (missing entries read as 0)
//   mix:     {"parts": [{"proportion": p, "demand": {...}}, ...]}
namespace cdiag::perf {

ResourceProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResourceProfile& profile);

TaskDemand demand_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TaskDemand& demand);

WorkloadMix mix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorkloadMix& mix);

nlohmann::json to_json(const PerfPrediction& prediction);

}  // namespace cdiag::perf
