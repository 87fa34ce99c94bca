// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/sim/io.hpp"

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::sim {

namespace {

using nlohmann::json;

const json& field(const json& j, const std::string& at, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw MisuseError(at + key + ": missing field");
  return j.at(key);
}

double number(const json& j, const std::string& at, const char* key) {
  const json& v = field(j, at, key);
  if (!v.is_number()) throw MisuseError(at + key + ": not a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& at, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return number(j, at, key);
}

std::string string(const json& j, const std::string& at, const char* key) {
  const json& v = field(j, at, key);
  if (!v.is_string()) throw MisuseError(at + key + ": not a string");
  return v.get<std::string>();
}

}  // namespace

ClusterTopology topology_from_json(const json& j) {
  const json& servers = field(j, "", "servers");
  if (!servers.is_array()) throw MisuseError("servers: not an array");
  std::vector<ServerSpec> out;
  for (std::size_t s = 0; s < servers.size(); ++s) {
    const json& js = servers[s];
    const std::string at = "servers[" + std::to_string(s) + "].";
    ServerSpec srv;
    srv.id = string(js, at, "id");
    srv.host = string(js, at, "host");
    srv.ssh_port = static_cast<int>(number_or(js, at, "ssh_port", 22));
    srv.nic_bytes_per_s = number(js, at, "nic_bytes_per_s");
    srv.storage_bytes_per_s = number(js, at, "storage_bytes_per_s");
    srv.storage_capacity_bytes =
        number_or(js, at, "storage_capacity_bytes", srv.storage_capacity_bytes);
    const json& gpus = field(js, at, "gpus");
    if (!gpus.is_array()) throw MisuseError(at + "gpus: not an array");
    for (std::size_t g = 0; g < gpus.size(); ++g) {
      const json& jg = gpus[g];
      const std::string gat = at + "gpus[" + std::to_string(g) + "].";
      GpuSpec gpu;
      gpu.id = string(jg, gat, "id");
      gpu.nominal_mhz = number(jg, gat, "nominal_mhz");
      gpu.peak_flops_per_s = number(jg, gat, "peak_flops_per_s");
      gpu.mem_bytes_per_s = number(jg, gat, "mem_bytes_per_s");
      gpu.memory_bytes = number_or(jg, gat, "memory_bytes", gpu.memory_bytes);
      srv.gpus.push_back(std::move(gpu));
    }
    out.push_back(std::move(srv));
  }
  return ClusterTopology(std::move(out));
}

json to_json(const ClusterTopology& topo) {
  json servers = json::array();
  for (const auto& s : topo.servers()) {
    json gpus = json::array();
    for (const auto& g : s.gpus) {
      gpus.push_back({{"id", g.id},
                      {"nominal_mhz", g.nominal_mhz},
                      {"peak_flops_per_s", g.peak_flops_per_s},
                      {"mem_bytes_per_s", g.mem_bytes_per_s},
                      {"memory_bytes", g.memory_bytes}});
    }
    servers.push_back({{"id", s.id},
                       {"host", s.host},
                       {"ssh_port", s.ssh_port},
                       {"nic_bytes_per_s", s.nic_bytes_per_s},
                       {"storage_bytes_per_s", s.storage_bytes_per_s},
                       {"storage_capacity_bytes", s.storage_capacity_bytes},
                       {"gpus", gpus}});
  }
  return {{"servers", servers}};
}

ClusterTopology load_topology(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw MisuseError(path + ": " + e.what());
  }
  return topology_from_json(j);
}

FaultSpec fault_from_json(const json& j) {
  FaultSpec f;
  f.kind = fault_kind_from_string(string(j, "", "kind"));
  f.target = string(j, "", "target");
  f.value = number(j, "", "value");
  f.onset_s = number_or(j, "", "onset_s", 0);
  return f;
}

json to_json(const FaultSpec& f) {
  return {{"kind", std::string(to_string(f.kind))},
          {"target", f.target},
          {"value", f.value},
          {"onset_s", f.onset_s}};
}

json to_json(const ActiveFault& f) {
  json j = to_json(f.spec);
  j["id"] = f.id;
  return j;
}

json to_json(const DeviceState& s) {
  json gpus = json::array();
  for (const auto& g : s.gpus) {
    gpus.push_back({{"id", g.id},
                    {"freq_mhz", g.freq_mhz},
                    {"power_w", g.power_w},
                    {"mem_free_bytes", g.mem_free_bytes},
                    {"ecc_errors", g.ecc_errors},
                    {"util", g.utilization}});
  }
  json servers = json::array();
  for (const auto& v : s.servers) {
    servers.push_back({{"id", v.id},
                       {"link_bw", v.link_bytes_per_s},
                       {"storage_free_bytes", v.storage_free_bytes}});
  }
  return {{"time_s", s.time_s}, {"gpus", gpus}, {"servers", servers}};
}

json to_json(const TelemetrySample& s) {
  return {{"t", s.time_s}, {"device", s.device}, {"metric", s.metric}, {"value", s.value}};
}

json to_json(const JobRun& r) {
  json its = json::array();
  for (const auto& i : r.iterations) {
    its.push_back({{"iteration", i.iteration},
                   {"start_s", i.start_s},
                   {"duration_s", i.duration_s},
                   {"rate", i.rate},
                   {"gating_gpu", i.gating_gpu}});
  }
  json j = {{"job_id", r.job_id},
            {"status", r.status == JobStatus::Completed ? "completed" : "failed"},
            {"gpus", r.gpus},
            {"start_s", r.start_s},
            {"end_s", r.end_s},
            {"iterations", its}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

json to_json(const CheckResult& r) {
  return {{"capability", r.capability},
          {"dimension", std::string(to_string(r.dimension))},
          {"pass", r.pass},
          {"measured", r.measured},
          {"expected", r.expected},
          {"unit", r.unit},
          {"evidence", r.evidence},
          {"failing_devices", r.failing_devices}};
}

json to_json(const CheckInfo& c) {
  return {{"capability", c.capability},
          {"dimension", std::string(to_string(c.dimension))},
          {"description", c.description},
          {"expected_bound", c.expected_bound}};
}

}  // namespace cdiag::sim
