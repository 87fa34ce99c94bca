// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/sim/topology.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::sim {

namespace {

void require_positive(double v, const std::string& field) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw MisuseError(field + ": must be positive, got " + format_number(v));
  }
}

}  // namespace

ClusterTopology::ClusterTopology(std::vector<ServerSpec> servers) : servers_(std::move(servers)) {
  if (servers_.empty()) throw MisuseError("servers: topology needs at least one server");
  std::set<std::string> ids;
  std::set<std::pair<std::string, int>> endpoints;
  for (std::size_t s = 0; s < servers_.size(); ++s) {
    const auto& srv = servers_[s];
    const std::string at = "servers[" + std::to_string(s) + "]";
    if (srv.id.empty()) throw MisuseError(at + ".id: must not be empty");
    if (!ids.insert(srv.id).second) throw MisuseError(at + ".id: duplicate id " + srv.id);
    if (srv.host.empty()) throw MisuseError(at + ".host: must not be empty");
    if (srv.ssh_port <= 0 || srv.ssh_port > 65535) {
      throw MisuseError(at + ".ssh_port: out of range " + std::to_string(srv.ssh_port));
    }
    if (!endpoints.insert({srv.host, srv.ssh_port}).second) {
      throw MisuseError(at + ".host: duplicate endpoint " + srv.host + ":" +
                        std::to_string(srv.ssh_port));
    }
    require_positive(srv.nic_bytes_per_s, at + ".nic_bytes_per_s");
    require_positive(srv.storage_bytes_per_s, at + ".storage_bytes_per_s");
    require_positive(srv.storage_capacity_bytes, at + ".storage_capacity_bytes");
    for (std::size_t g = 0; g < srv.gpus.size(); ++g) {
      const auto& gpu = srv.gpus[g];
      const std::string gat = at + ".gpus[" + std::to_string(g) + "]";
      if (gpu.id.empty()) throw MisuseError(gat + ".id: must not be empty");
      if (!ids.insert(gpu.id).second) throw MisuseError(gat + ".id: duplicate id " + gpu.id);
      require_positive(gpu.nominal_mhz, gat + ".nominal_mhz");
      require_positive(gpu.peak_flops_per_s, gat + ".peak_flops_per_s");
      require_positive(gpu.mem_bytes_per_s, gat + ".mem_bytes_per_s");
      require_positive(gpu.memory_bytes, gat + ".memory_bytes");
    }
  }
}

const GpuSpec* ClusterTopology::find_gpu(std::string_view id) const {
  for (const auto& s : servers_)
    for (const auto& g : s.gpus)
      if (g.id == id) return &g;
  return nullptr;
}

const ServerSpec* ClusterTopology::find_server(std::string_view id) const {
  for (const auto& s : servers_)
    if (s.id == id) return &s;
  return nullptr;
}

const ServerSpec* ClusterTopology::server_of_gpu(std::string_view gpu_id) const {
  for (const auto& s : servers_)
    for (const auto& g : s.gpus)
      if (g.id == gpu_id) return &s;
  return nullptr;
}

std::vector<std::string> ClusterTopology::gpu_ids() const {
  std::vector<std::string> out;
  for (const auto& s : servers_)
    for (const auto& g : s.gpus) out.push_back(g.id);
  return out;
}

std::vector<std::string> ClusterTopology::server_ids() const {
  std::vector<std::string> out;
  for (const auto& s : servers_) out.push_back(s.id);
  return out;
}

std::size_t ClusterTopology::gpu_count() const {
  std::size_t n = 0;
  for (const auto& s : servers_) n += s.gpus.size();
  return n;
}

ClusterTopology uniform_topology(std::size_t server_count, std::size_t gpus_per_server,
                                 const std::string& subnet) {
  std::vector<ServerSpec> servers;
  std::size_t next_gpu = 0;
  for (std::size_t s = 0; s < server_count; ++s) {
    ServerSpec srv;
    srv.id = "node-" + std::to_string(s);
    srv.host = subnet + std::to_string(11 + s);
    for (std::size_t g = 0; g < gpus_per_server; ++g) {
      GpuSpec gpu;
      gpu.id = "gpu-" + std::to_string(next_gpu++);
      srv.gpus.push_back(gpu);
    }
    servers.push_back(std::move(srv));
  }
  return ClusterTopology(std::move(servers));
}

}  // namespace cdiag::sim
