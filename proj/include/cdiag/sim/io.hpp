// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cdiag/sim/checks.hpp"
#include "cdiag/sim/cluster.hpp"
#include "cdiag/sim/topology.hpp"

namespace cdiag::sim {

/// {"servers":[{"id","host","ssh_port","nic_bytes_per_s","storage_bytes_per_s",
/// "storage_capacity_bytes"?,"gpus":[{"id","nominal_mhz","peak_flops_per_s",
/// "mem_bytes_per_s","memory_bytes"?}]}]}
ClusterTopology topology_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClusterTopology& topo);
ClusterTopology load_topology(const std::string& path);

/// {"kind","target","value","onset_s"?}
FaultSpec fault_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FaultSpec& f);
nlohmann::json to_json(const ActiveFault& f);

nlohmann::json to_json(const DeviceState& s);
nlohmann::json to_json(const TelemetrySample& s);
nlohmann::json to_json(const JobRun& r);
nlohmann::json to_json(const CheckResult& r);
nlohmann::json to_json(const CheckInfo& c);

}  // namespace cdiag::sim
