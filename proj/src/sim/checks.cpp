// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/sim/checks.hpp"

#include <algorithm>
#include <limits>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/perf/model.hpp"

namespace cdiag::sim {

namespace {

bool gpu_capability(std::string_view c) {
  return c == "gpu-matmul" || c == "gpu-membw" || c == "gpu-freq";
}

std::vector<std::string> resolve_gpus(const ClusterTopology& topo,
                                      const std::vector<std::string>& targets) {
  if (targets.empty()) return topo.gpu_ids();
  std::vector<std::string> out;
  auto add = [&](const std::string& id) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  };
  for (const auto& t : targets) {
    if (topo.find_gpu(t)) {
      add(t);
    } else if (const ServerSpec* s = topo.find_server(t)) {
      for (const auto& g : s->gpus) add(g.id);
    } else {
      throw NotFoundError("unknown device: " + t);
    }
  }
  return out;
}

std::vector<std::string> resolve_servers(const ClusterTopology& topo,
                                         const std::vector<std::string>& targets) {
  if (targets.empty()) return topo.server_ids();
  std::vector<std::string> out;
  for (const auto& t : targets) {
    const ServerSpec* s = topo.find_server(t);
    if (!s) s = topo.server_of_gpu(t);
    if (!s) throw NotFoundError("unknown device: " + t);
    if (std::find(out.begin(), out.end(), s->id) == out.end()) out.push_back(s->id);
  }
  return out;
}

struct DeviceReading {
  std::string device;
  double measured;
  double expected;
  bool fail;
  std::string note;  // failure detail
};

struct PerfRound {
  std::vector<DeviceReading> readings;
  std::string unit;
};

bool below_threshold(double measured, double expected, double threshold) {
  perf::PerfPrediction p;
  p.rate = expected;
  p.total_seconds = 1.0 / expected;
  if (measured <= 0) return true;
  return perf::detect_slowdown(p, measured, threshold).slow;
}

PerfRound performance_round(const Cluster& cluster, std::string_view capability,
                            const std::vector<std::string>& devices, const DeviceState& st,
                            const CheckOptions& opt) {
  const auto& topo = cluster.topology();
  PerfRound round;
  for (const auto& id : devices) {
    DeviceReading r{id, 0, 0, false, {}};
    if (capability == "gpu-freq") {
      round.unit = "MHz";
      r.measured = st.gpu(id)->freq_mhz;
      r.expected = topo.find_gpu(id)->nominal_mhz;
      r.fail = below_threshold(r.measured, r.expected, opt.threshold);
    } else if (capability == "gpu-matmul") {
      round.unit = "FLOP/s";
      const GpuSpec* g = topo.find_gpu(id);
      r.measured = g->peak_flops_per_s * st.gpu(id)->freq_mhz / g->nominal_mhz;
      r.expected = g->peak_flops_per_s;
      r.fail = below_threshold(r.measured, r.expected, opt.threshold);
    } else if (capability == "gpu-membw") {
      round.unit = "B/s";
      const GpuSpec* g = topo.find_gpu(id);
      r.expected = g->mem_bytes_per_s;
      const double free = st.gpu(id)->mem_free_bytes;
      if (free < opt.membw_buffer_bytes) {
        r.fail = true;
        r.note = "allocation of " + format_number(opt.membw_buffer_bytes) +
                 " bytes failed, free " + format_number(free);
      } else {
        r.measured = g->mem_bytes_per_s;
      }
    } else if (capability == "rdma-rw") {
      round.unit = "B/s";
      r.measured = st.server(id)->link_bytes_per_s;
      r.expected = topo.find_server(id)->nic_bytes_per_s;
      r.fail = below_threshold(r.measured, r.expected, opt.threshold);
    } else {
      round.unit = "B/s";
      const ServerSpec* s = topo.find_server(id);
      r.expected = s->storage_bytes_per_s;
      const double free = st.server(id)->storage_free_bytes;
      if (free < opt.storage_probe_bytes) {
        r.fail = true;
        r.note = "cannot write " + format_number(opt.storage_probe_bytes) +
                 "-byte test file, free " + format_number(free);
      } else {
        r.measured = s->storage_bytes_per_s;
      }
    }
    round.readings.push_back(std::move(r));
  }
  return round;
}

std::string describe(const DeviceReading& r, const std::string& unit) {
  if (!r.note.empty()) return r.device + ": " + r.note;
  return r.device + ": measured " + format_number(r.measured) + " " + unit + ", expected " +
         format_number(r.expected) + " " + unit;
}

void summarize_worst(CheckResult& res, const PerfRound& round) {
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : round.readings) {
    const double ratio = r.measured / r.expected;
    if (ratio < worst_ratio) {
      worst_ratio = ratio;
      res.measured = r.measured;
      res.expected = r.expected;
    }
  }
  res.unit = round.unit;
}

CheckResult run_performance(const Cluster& cluster, std::string_view capability,
                            const std::vector<std::string>& devices, const CheckOptions& opt) {
  CheckResult res;
  const PerfRound round = performance_round(cluster, capability, devices, cluster.state(), opt);
  summarize_worst(res, round);
  std::vector<std::string> lines;
  for (const auto& r : round.readings) {
    if (!r.fail) continue;
    res.failing_devices.push_back(r.device);
    lines.push_back(describe(r, round.unit));
  }
  res.pass = res.failing_devices.empty();
  if (res.pass) {
    res.evidence = std::to_string(devices.size()) + " devices within " +
                   format_number(opt.threshold * 100) + "% of expected; worst " +
                   format_number(res.measured) + " " + res.unit + " of " +
                   format_number(res.expected) + " " + res.unit;
  } else {
    res.evidence = join(lines, "; ");
  }
  return res;
}

CheckResult run_correctness(const Cluster& cluster, std::string_view capability,
                            const std::vector<std::string>& devices) {
  CheckResult res;
  res.unit = "errors";
  const auto& topo = cluster.topology();
  const DeviceState st = cluster.state();
  if (capability == "storage-rw") {
    res.evidence = "checksums verified on " + std::to_string(devices.size()) + " servers";
    return res;
  }
  std::vector<std::string> gpus;
  if (capability == "rdma-rw") {
    for (const auto& s : devices)
      for (const auto& g : topo.find_server(s)->gpus) gpus.push_back(g.id);
  } else {
    gpus = devices;
  }
  std::vector<std::string> lines;
  for (const auto& g : gpus) {
    const double errs = st.gpu(g)->ecc_errors;
    res.measured = std::max(res.measured, errs);
    if (errs > 0) {
      res.failing_devices.push_back(g);
      lines.push_back(g + ": " + format_number(errs) + " uncorrectable ECC errors, result mismatch");
    }
  }
  res.pass = res.failing_devices.empty();
  res.evidence = res.pass ? "results matched reference on " + std::to_string(gpus.size()) + " gpus"
                          : join(lines, "; ");
  return res;
}

CheckResult run_stability(const Cluster& cluster, std::string_view capability,
                          const std::vector<std::string>& devices, const CheckOptions& opt) {
  if (opt.stability_repeats < 2) throw MisuseError("stability needs at least 2 repeats");
  CheckResult res;
  res.unit = "probes";
  res.expected = opt.stability_repeats;
  const double t0 = cluster.now();
  std::vector<PerfRound> rounds;
  std::vector<DeviceState> states;
  for (int i = 0; i < opt.stability_repeats; ++i) {
    states.push_back(cluster.state_at(t0 + i * opt.stability_interval_s));
    rounds.push_back(performance_round(cluster, capability, devices, states.back(), opt));
  }
  std::vector<std::string> lines;
  auto flag = [&](const std::string& device, std::string line) {
    if (std::find(res.failing_devices.begin(), res.failing_devices.end(), device) ==
        res.failing_devices.end()) {
      res.failing_devices.push_back(device);
    }
    lines.push_back(std::move(line));
  };
  int passing = 0;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    bool ok = true;
    for (const auto& r : rounds[i].readings) {
      if (!r.fail) continue;
      ok = false;
      flag(r.device, "probe " + std::to_string(i + 1) + " " + describe(r, rounds[i].unit));
    }
    passing += ok ? 1 : 0;
  }
  const double span = (opt.stability_repeats - 1) * opt.stability_interval_s;
  if (capability == "gpu-membw" || capability == "storage-rw") {
    const bool gpu = capability == "gpu-membw";
    for (const auto& d : devices) {
      const double first = gpu ? states.front().gpu(d)->mem_free_bytes
                                : states.front().server(d)->storage_free_bytes;
      const double last = gpu ? states.back().gpu(d)->mem_free_bytes
                               : states.back().server(d)->storage_free_bytes;
      if (last < first) {
        flag(d, d + ": free " + std::string(gpu ? "memory" : "storage") + " fell from " +
                    format_number(first) + " to " + format_number(last) + " bytes over " +
                    format_number(span) + " s");
      }
    }
  }
  res.measured = passing;
  res.pass = res.failing_devices.empty();
  res.evidence = res.pass ? std::to_string(passing) + " of " +
                                std::to_string(opt.stability_repeats) + " probes passed over " +
                                format_number(span) + " s, no capacity drift"
                          : join(lines, "; ");
  return res;
}

}  // namespace

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Correctness: return "correctness";
    case Dimension::Performance: return "performance";
    case Dimension::Stability: return "stability";
  }
  return "unknown";
}

Dimension dimension_from_string(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "correctness") return Dimension::Correctness;
  if (n == "performance") return Dimension::Performance;
  if (n == "stability") return Dimension::Stability;
  throw MisuseError("unknown dimension: " + std::string(name));
}

const std::vector<CheckInfo>& list_checks() {
  static const std::vector<CheckInfo> checks = [] {
    struct Cap {
      const char* name;
      const char* what;
      const char* perf_bound;
    };
    const Cap caps[] = {
        {"gpu-matmul", "dense matrix multiply on each gpu", ">= 90% of peak FLOP/s"},
        {"gpu-membw", "device memory copy bandwidth", ">= 90% of peak B/s with 8e9-byte buffer"},
        {"rdma-rw", "RDMA read/write between servers", ">= 90% of NIC B/s"},
        {"storage-rw", "sequential read/write on local storage",
         ">= 90% of storage B/s with 1e11-byte file"},
        {"gpu-freq", "core clock under load", ">= 90% of nominal MHz"},
    };
    std::vector<CheckInfo> out;
    for (const auto& c : caps) {
      out.push_back({c.name, Dimension::Correctness, std::string(c.what) + ", compare results",
                     "0 mismatches"});
      out.push_back({c.name, Dimension::Performance, std::string(c.what) + ", measure throughput",
                     c.perf_bound});
      out.push_back({c.name, Dimension::Stability,
                     std::string(c.what) + ", 5 repeats 60 s apart",
                     "all repeats pass, no capacity drift"});
    }
    return out;
  }();
  return checks;
}

const std::vector<std::string>& capability_names() {
  static const std::vector<std::string> names = {"gpu-matmul", "gpu-membw", "rdma-rw", "storage-rw",
                                                 "gpu-freq"};
  return names;
}

const std::vector<std::string>& tool_names() {
  static const std::vector<std::string> names = [] {
    auto v = capability_names();
    v.push_back("telemetry");
    return v;
  }();
  return names;
}

bool is_registered_tool(std::string_view name) {
  const auto& t = tool_names();
  return std::find(t.begin(), t.end(), name) != t.end();
}

CheckResult run_check(const Cluster& cluster, std::string_view capability, Dimension dimension,
                      const CheckOptions& options) {
  const auto& caps = capability_names();
  if (std::find(caps.begin(), caps.end(), capability) == caps.end()) {
    throw NotFoundError("unknown capability: " + std::string(capability));
  }
  const auto devices = gpu_capability(capability)
                           ? resolve_gpus(cluster.topology(), options.targets)
                           : resolve_servers(cluster.topology(), options.targets);
  CheckResult res;
  switch (dimension) {
    case Dimension::Correctness: res = run_correctness(cluster, capability, devices); break;
    case Dimension::Performance: res = run_performance(cluster, capability, devices, options); break;
    case Dimension::Stability: res = run_stability(cluster, capability, devices, options); break;
  }
  res.capability = std::string(capability);
  res.dimension = dimension;
  return res;
}

}  // namespace cdiag::sim
