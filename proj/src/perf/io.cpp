// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/perf/io.hpp"

#include "cdiag/common/error.hpp"

namespace cdiag::perf {

namespace {

double required_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw MisuseError(std::string("missing field: ") + key);
  if (!j.at(key).is_number()) throw MisuseError(std::string("field is not a number: ") + key);
  return j.at(key).get<double>();
}

double optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return 0.0;
  if (!j.at(key).is_number()) throw MisuseError(std::string("field is not a number: ") + key);
  return j.at(key).get<double>();
}

}  // namespace

ResourceProfile profile_from_json(const nlohmann::json& j) {
  return ResourceProfile(required_number(j, "compute_flops_per_s"),
                         required_number(j, "mem_bytes_per_s"),
                         required_number(j, "io_bytes_per_s"));
}

nlohmann::json to_json(const ResourceProfile& p) {
  return {{"compute_flops_per_s", p.rate(ResourceKind::Compute)},
          {"mem_bytes_per_s", p.rate(ResourceKind::MemoryBandwidth)},
          {"io_bytes_per_s", p.rate(ResourceKind::IoBandwidth)}};
}

TaskDemand demand_from_json(const nlohmann::json& j) {
  return TaskDemand(optional_number(j, "compute_flops"), optional_number(j, "mem_bytes"),
                    optional_number(j, "io_bytes"));
}

nlohmann::json to_json(const TaskDemand& d) {
  return {{"compute_flops", d.amount(ResourceKind::Compute)},
          {"mem_bytes", d.amount(ResourceKind::MemoryBandwidth)},
          {"io_bytes", d.amount(ResourceKind::IoBandwidth)}};
}

WorkloadMix mix_from_json(const nlohmann::json& j) {
  if (!j.contains("parts") || !j.at("parts").is_array()) throw MisuseError("missing field: parts");
  std::vector<MixPart> parts;
  for (const auto& part : j.at("parts")) {
    parts.push_back({demand_from_json(part.at("demand")), required_number(part, "proportion")});
  }
  return WorkloadMix(std::move(parts));
}

nlohmann::json to_json(const WorkloadMix& mix) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : mix.parts()) {
    parts.push_back({{"proportion", p.proportion}, {"demand", to_json(p.demand)}});
  }
  return {{"parts", parts}};
}

nlohmann::json to_json(const PerfPrediction& pred) {
  nlohmann::json bottleneck = nlohmann::json::array();
  for (auto k : pred.bottleneck) bottleneck.push_back(std::string(to_string(k)));
  return {{"rate_per_s", pred.rate},
          {"seconds_per_task", pred.total_seconds},
          {"busy_seconds",
           {{"compute", pred.busy_seconds[0]}, {"memory", pred.busy_seconds[1]}, {"io", pred.busy_seconds[2]}}},
          {"bottleneck", bottleneck}};
}

}  // namespace cdiag::perf
