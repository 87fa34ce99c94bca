// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Simulated GPU cluster. Device state at any simulated time is a pure function
// of the topology, the injected faults, and operator overrides (application
// clocks), so reads never mutate and clearing a fault restores the exact
// pre-fault state.

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "cdiag/perf/model.hpp"
#include "cdiag/sim/topology.hpp"

namespace cdiag::sim {

enum class FaultKind { GpuFrequencyThrottle, LinkDegrade, MemoryLeak, DiskFill, EccBurst };

std::string_view to_string(FaultKind kind);
/// Throws MisuseError on unknown names.
FaultKind fault_kind_from_string(std::string_view name);

/// `value` by kind: throttle target MHz, link bandwidth factor in (0, 1),
/// leaked bytes per second, filled bytes per second, ECC error count.
struct FaultSpec {
  FaultKind kind = FaultKind::GpuFrequencyThrottle;
  std::string target;
  double value = 0;
  double onset_s = 0;
};

struct ActiveFault {
  std::string id;
  FaultSpec spec;
};

struct GpuState {
  std::string id;
  double freq_mhz = 0;
  double power_w = 0;
  double mem_free_bytes = 0;
  double ecc_errors = 0;
  double utilization = 0;
  bool operator==(const GpuState&) const = default;
};

struct ServerState {
  std::string id;
  double link_bytes_per_s = 0;
  double storage_free_bytes = 0;
  bool operator==(const ServerState&) const = default;
};

struct DeviceState {
  double time_s = 0;
  std::vector<GpuState> gpus;
  std::vector<ServerState> servers;

  const GpuState* gpu(std::string_view id) const;
  const ServerState* server(std::string_view id) const;
  bool operator==(const DeviceState&) const = default;
};

/// Metric names: gpu "freq_mhz", "power_w", "mem_free_bytes", "ecc_errors",
/// "util"; server "link_bw", "storage_free_bytes".
struct TelemetrySample {
  double time_s = 0;
  std::string device;
  std::string metric;
  double value = 0;
  bool operator==(const TelemetrySample&) const = default;
};

bool is_gpu_metric(std::string_view metric);
bool is_server_metric(std::string_view metric);

/// Value of a metric on a device in a state; throws NotFoundError / MisuseError.
double metric_value(const DeviceState& state, std::string_view device, std::string_view metric);
/// Healthy reference value of a metric for a device (nominal clock, full memory...).
double nominal_metric_value(const ClusterTopology& topo, std::string_view device,
                            std::string_view metric);

struct PowerModel {
  double idle_w = 60;
  double peak_w = 400;
};

struct ClusterConfig {
  std::uint64_t seed = 0;
  double noise_amplitude = 0.01;  // iteration times scaled by 1 + a(2u - 1)
  double telemetry_period_s = 1.0;
  PowerModel power;
  perf::ParallelismRule rules = perf::ParallelismRule::defaults();
};

struct JobSpec {
  std::string id;
  perf::WorkloadMix mix;
  std::vector<std::string> gpus;
  std::size_t iterations = 1;
  std::optional<double> start_s;  // defaults to the current clock
};

struct IterationRecord {
  std::size_t iteration = 0;
  double start_s = 0;
  double duration_s = 0;
  double rate = 0;  // iterations per second
  std::string gating_gpu;
};

enum class JobStatus { Completed, Failed };

struct JobRun {
  std::string job_id;
  JobStatus status = JobStatus::Completed;
  std::string failure;
  std::vector<std::string> gpus;
  std::vector<IterationRecord> iterations;
  double start_s = 0;
  double end_s = 0;
};

/// Thread-safe: reads take a shared lock, mutations an exclusive one.
class Cluster {
 public:
  Cluster(ClusterTopology topology, ClusterConfig config = {});

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  const ClusterTopology& topology() const { return topology_; }
  const ClusterConfig& config() const { return config_; }

  double now() const;
  /// dt >= 0.
  void advance(double dt);

  /// Returns the fault id ("f-1", "f-2", ...). Throws MisuseError on unknown
  /// targets or out-of-range values.
  std::string inject_fault(const FaultSpec& spec);
  /// Idempotent for already-cleared ids; NotFoundError for never-issued ids.
  void clear_fault(std::string_view fault_id);
  /// Clears every fault targeting `device`; returns how many were removed.
  std::size_t clear_faults_on(std::string_view device);
  std::vector<ActiveFault> faults() const;

  DeviceState state() const;
  /// State at a simulated time, including projected times after now().
  DeviceState state_at(double t) const;

  /// Performance profile one gpu presents to a job at time t.
  perf::ResourceProfile gpu_profile(std::string_view gpu_id, double t) const;
  perf::ResourceProfile nominal_gpu_profile(std::string_view gpu_id) const;

  /// Sets the application clock of a gpu; must not exceed nominal. Also lifts
  /// any throttle fault on that gpu.
  void set_frequency(std::string_view gpu_id, double mhz);

  /// Runs all iterations synchronously in simulated time. The clock ends at
  /// max(now, job end).
  JobRun run_job(const JobSpec& spec);
  std::vector<JobRun> job_history() const;
  std::optional<JobSpec> find_job_spec(std::string_view job_id) const;

  /// Samples at multiples of the telemetry period in [start, end]. Empty when
  /// start >= end. MisuseError when end is after now().
  std::vector<TelemetrySample> sample_telemetry(double start, double end) const;

 private:
  DeviceState state_at_locked(double t) const;
  perf::ResourceProfile gpu_profile_locked(std::string_view gpu_id, double t) const;
  bool gpu_loaded_locked(std::string_view gpu_id, double t) const;

  struct Busy {
    double start;
    double end;
    std::vector<std::string> gpus;
  };

  ClusterTopology topology_;
  ClusterConfig config_;
  mutable std::shared_mutex mu_;
  double now_ = 0;
  std::uint64_t next_fault_ = 1;
  std::vector<ActiveFault> faults_;
  std::map<std::string, double, std::less<>> app_clock_mhz_;
  std::vector<Busy> busy_;
  std::vector<JobRun> history_;
  std::vector<JobSpec> specs_;
};

}  // namespace cdiag::sim
