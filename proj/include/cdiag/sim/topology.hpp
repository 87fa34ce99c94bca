// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cdiag::sim {

struct GpuSpec {
  std::string id;
  double nominal_mhz = 1410;
  double peak_flops_per_s = 312e12;  // at nominal frequency
  double mem_bytes_per_s = 2.039e12;
  double memory_bytes = 80e9;
};

struct ServerSpec {
  std::string id;
  std::string host;
  int ssh_port = 22;
  std::vector<GpuSpec> gpus;
  double nic_bytes_per_s = 100e9;
  double storage_bytes_per_s = 10e9;
  double storage_capacity_bytes = 30e12;
};

class ClusterTopology {
 public:
  ClusterTopology() = default;
  /// Throws MisuseError naming the offending field (e.g. "servers[1].gpus[3].id").
  explicit ClusterTopology(std::vector<ServerSpec> servers);

  const std::vector<ServerSpec>& servers() const { return servers_; }

  const GpuSpec* find_gpu(std::string_view id) const;
  const ServerSpec* find_server(std::string_view id) const;
  /// Server that hosts the gpu; nullptr when the id is unknown.
  const ServerSpec* server_of_gpu(std::string_view gpu_id) const;

  std::vector<std::string> gpu_ids() const;
  std::vector<std::string> server_ids() const;
  bool has_device(std::string_view id) const { return find_gpu(id) || find_server(id); }
  std::size_t gpu_count() const;

 private:
  std::vector<ServerSpec> servers_;
};

/// `server_count` servers with `gpus_per_server` A800-class gpus each; gpu ids
/// run gpu-0..gpu-N across servers, servers are node-0..node-M.
ClusterTopology uniform_topology(std::size_t server_count, std::size_t gpus_per_server,
                                 const std::string& subnet = "10.0.0.");

}  // namespace cdiag::sim
