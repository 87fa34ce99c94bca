// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/sim/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::sim {

namespace {

constexpr std::string_view kGpuMetrics[] = {"freq_mhz", "power_w", "mem_free_bytes", "ecc_errors",
                                            "util"};
constexpr std::string_view kServerMetrics[] = {"link_bw", "storage_free_bytes"};

double unit_noise(std::uint64_t seed, std::string_view job, std::size_t iteration) {
  const std::uint64_t h = mix64(seed ^ fnv1a(job) ^ mix64(iteration + 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::GpuFrequencyThrottle: return "gpu_frequency_throttle";
    case FaultKind::LinkDegrade: return "link_degrade";
    case FaultKind::MemoryLeak: return "memory_leak";
    case FaultKind::DiskFill: return "disk_fill";
    case FaultKind::EccBurst: return "ecc_burst";
  }
  return "unknown";
}

FaultKind fault_kind_from_string(std::string_view name) {
  for (auto k : {FaultKind::GpuFrequencyThrottle, FaultKind::LinkDegrade, FaultKind::MemoryLeak,
                 FaultKind::DiskFill, FaultKind::EccBurst}) {
    if (to_string(k) == name) return k;
  }
  throw MisuseError("unknown fault kind: " + std::string(name));
}

const GpuState* DeviceState::gpu(std::string_view id) const {
  for (const auto& g : gpus)
    if (g.id == id) return &g;
  return nullptr;
}

const ServerState* DeviceState::server(std::string_view id) const {
  for (const auto& s : servers)
    if (s.id == id) return &s;
  return nullptr;
}

bool is_gpu_metric(std::string_view metric) {
  return std::find(std::begin(kGpuMetrics), std::end(kGpuMetrics), metric) != std::end(kGpuMetrics);
}

bool is_server_metric(std::string_view metric) {
  return std::find(std::begin(kServerMetrics), std::end(kServerMetrics), metric) !=
         std::end(kServerMetrics);
}

double metric_value(const DeviceState& state, std::string_view device, std::string_view metric) {
  if (is_gpu_metric(metric)) {
    const GpuState* g = state.gpu(device);
    if (!g) {
      if (state.server(device)) {
        throw MisuseError("metric " + std::string(metric) + " applies to gpus, not " +
                          std::string(device));
      }
      throw NotFoundError("unknown device: " + std::string(device));
    }
    if (metric == "freq_mhz") return g->freq_mhz;
    if (metric == "power_w") return g->power_w;
    if (metric == "mem_free_bytes") return g->mem_free_bytes;
    if (metric == "ecc_errors") return g->ecc_errors;
    return g->utilization;
  }
  if (is_server_metric(metric)) {
    const ServerState* s = state.server(device);
    if (!s) {
      if (state.gpu(device)) {
        throw MisuseError("metric " + std::string(metric) + " applies to servers, not " +
                          std::string(device));
      }
      throw NotFoundError("unknown device: " + std::string(device));
    }
    if (metric == "link_bw") return s->link_bytes_per_s;
    return s->storage_free_bytes;
  }
  throw MisuseError("unknown metric: " + std::string(metric));
}

double nominal_metric_value(const ClusterTopology& topo, std::string_view device,
                            std::string_view metric) {
  if (is_gpu_metric(metric)) {
    const GpuSpec* g = topo.find_gpu(device);
    if (!g) throw NotFoundError("unknown gpu: " + std::string(device));
    if (metric == "freq_mhz") return g->nominal_mhz;
    if (metric == "mem_free_bytes") return g->memory_bytes;
    if (metric == "ecc_errors") return 0;
    if (metric == "util") return 1;
    throw MisuseError("no nominal value for metric " + std::string(metric));
  }
  if (is_server_metric(metric)) {
    const ServerSpec* s = topo.find_server(device);
    if (!s) throw NotFoundError("unknown server: " + std::string(device));
    if (metric == "link_bw") return s->nic_bytes_per_s;
    return s->storage_capacity_bytes;
  }
  throw MisuseError("unknown metric: " + std::string(metric));
}

Cluster::Cluster(ClusterTopology topology, ClusterConfig config)
    : topology_(std::move(topology)), config_(config) {
  if (topology_.servers().empty()) throw MisuseError("cluster needs a non-empty topology");
  if (!(config_.telemetry_period_s > 0)) throw MisuseError("telemetry_period_s must be positive");
  if (!(config_.noise_amplitude >= 0 && config_.noise_amplitude < 1)) {
    throw MisuseError("noise_amplitude must be in [0, 1)");
  }
  if (!(config_.power.idle_w >= 0 && config_.power.peak_w > config_.power.idle_w)) {
    throw MisuseError("power model needs 0 <= idle_w < peak_w");
  }
  for (const auto& s : topology_.servers())
    for (const auto& g : s.gpus) app_clock_mhz_[g.id] = g.nominal_mhz;
}

double Cluster::now() const {
  std::shared_lock lock(mu_);
  return now_;
}

void Cluster::advance(double dt) {
  if (!(dt >= 0) || !std::isfinite(dt)) throw MisuseError("advance needs dt >= 0");
  std::unique_lock lock(mu_);
  now_ += dt;
}

std::string Cluster::inject_fault(const FaultSpec& spec) {
  if (!(spec.onset_s >= 0) || !std::isfinite(spec.onset_s)) {
    throw MisuseError("fault onset_s must be >= 0");
  }
  const bool gpu_target = topology_.find_gpu(spec.target) != nullptr;
  const bool server_target = topology_.find_server(spec.target) != nullptr;
  switch (spec.kind) {
    case FaultKind::GpuFrequencyThrottle: {
      if (!gpu_target) throw MisuseError("throttle target must be a gpu: " + spec.target);
      const double nominal = topology_.find_gpu(spec.target)->nominal_mhz;
      if (!(spec.value > 0 && spec.value < nominal)) {
        throw MisuseError("throttle frequency must be in (0, " + format_number(nominal) + ") MHz");
      }
      break;
    }
    case FaultKind::LinkDegrade:
      if (!server_target) throw MisuseError("link_degrade target must be a server: " + spec.target);
      if (!(spec.value > 0 && spec.value < 1)) {
        throw MisuseError("link_degrade factor must be in (0, 1)");
      }
      break;
    case FaultKind::MemoryLeak:
      if (!gpu_target) throw MisuseError("memory_leak target must be a gpu: " + spec.target);
      if (!(spec.value > 0) || !std::isfinite(spec.value)) {
        throw MisuseError("memory_leak rate must be positive");
      }
      break;
    case FaultKind::DiskFill:
      if (!server_target) throw MisuseError("disk_fill target must be a server: " + spec.target);
      if (!(spec.value > 0) || !std::isfinite(spec.value)) {
        throw MisuseError("disk_fill rate must be positive");
      }
      break;
    case FaultKind::EccBurst:
      if (!gpu_target) throw MisuseError("ecc_burst target must be a gpu: " + spec.target);
      if (!(spec.value >= 1) || !std::isfinite(spec.value)) {
        throw MisuseError("ecc_burst count must be >= 1");
      }
      break;
  }
  std::unique_lock lock(mu_);
  ActiveFault f{"f-" + std::to_string(next_fault_++), spec};
  faults_.push_back(f);
  return f.id;
}

void Cluster::clear_fault(std::string_view fault_id) {
  std::unique_lock lock(mu_);
  auto it = std::find_if(faults_.begin(), faults_.end(),
                         [&](const ActiveFault& f) { return f.id == fault_id; });
  if (it != faults_.end()) {
    faults_.erase(it);
    return;
  }
  // Issued ids are "f-<n>" with n < next_fault_; clearing one twice is a no-op.
  if (fault_id.size() > 2 && fault_id.substr(0, 2) == "f-") {
    auto n = parse_int(fault_id.substr(2));
    if (n && *n >= 1 && static_cast<std::uint64_t>(*n) < next_fault_) return;
  }
  throw NotFoundError("unknown fault: " + std::string(fault_id));
}

std::size_t Cluster::clear_faults_on(std::string_view device) {
  if (!topology_.has_device(device)) throw NotFoundError("unknown device: " + std::string(device));
  std::unique_lock lock(mu_);
  const auto before = faults_.size();
  std::erase_if(faults_, [&](const ActiveFault& f) { return f.spec.target == device; });
  return before - faults_.size();
}

std::vector<ActiveFault> Cluster::faults() const {
  std::shared_lock lock(mu_);
  return faults_;
}

DeviceState Cluster::state() const {
  std::shared_lock lock(mu_);
  return state_at_locked(now_);
}

DeviceState Cluster::state_at(double t) const {
  std::shared_lock lock(mu_);
  return state_at_locked(t);
}

bool Cluster::gpu_loaded_locked(std::string_view gpu_id, double t) const {
  for (const auto& b : busy_) {
    if (t >= b.start && t < b.end &&
        std::find(b.gpus.begin(), b.gpus.end(), gpu_id) != b.gpus.end()) {
      return true;
    }
  }
  return false;
}

DeviceState Cluster::state_at_locked(double t) const {
  DeviceState st;
  st.time_s = t;
  for (const auto& srv : topology_.servers()) {
    for (const auto& g : srv.gpus) {
      GpuState gs;
      gs.id = g.id;
      gs.freq_mhz = app_clock_mhz_.find(g.id)->second;
      gs.mem_free_bytes = g.memory_bytes;
      for (const auto& f : faults_) {
        if (f.spec.target != g.id || f.spec.onset_s > t) continue;
        switch (f.spec.kind) {
          case FaultKind::GpuFrequencyThrottle:
            gs.freq_mhz = std::min(gs.freq_mhz, f.spec.value);
            break;
          case FaultKind::MemoryLeak:
            gs.mem_free_bytes -= f.spec.value * (t - f.spec.onset_s);
            break;
          case FaultKind::EccBurst:
            gs.ecc_errors += f.spec.value;
            break;
          default:
            break;
        }
      }
      gs.mem_free_bytes = std::max(0.0, gs.mem_free_bytes);
      gs.utilization = gpu_loaded_locked(g.id, t) ? 1.0 : 0.0;
      gs.power_w = config_.power.idle_w + (config_.power.peak_w - config_.power.idle_w) *
                                              gs.utilization * gs.freq_mhz / g.nominal_mhz;
      st.gpus.push_back(std::move(gs));
    }
    ServerState ss;
    ss.id = srv.id;
    ss.link_bytes_per_s = srv.nic_bytes_per_s;
    ss.storage_free_bytes = srv.storage_capacity_bytes;
    for (const auto& f : faults_) {
      if (f.spec.target != srv.id || f.spec.onset_s > t) continue;
      if (f.spec.kind == FaultKind::LinkDegrade) ss.link_bytes_per_s *= f.spec.value;
      if (f.spec.kind == FaultKind::DiskFill) {
        ss.storage_free_bytes -= f.spec.value * (t - f.spec.onset_s);
      }
    }
    ss.storage_free_bytes = std::max(0.0, ss.storage_free_bytes);
    st.servers.push_back(std::move(ss));
  }
  return st;
}

perf::ResourceProfile Cluster::gpu_profile_locked(std::string_view gpu_id, double t) const {
  const GpuSpec* g = topology_.find_gpu(gpu_id);
  if (!g) throw NotFoundError("unknown gpu: " + std::string(gpu_id));
  const ServerSpec* srv = topology_.server_of_gpu(gpu_id);
  double freq = app_clock_mhz_.find(g->id)->second;
  double link = srv->nic_bytes_per_s;
  for (const auto& f : faults_) {
    if (f.spec.onset_s > t) continue;
    if (f.spec.kind == FaultKind::GpuFrequencyThrottle && f.spec.target == g->id) {
      freq = std::min(freq, f.spec.value);
    }
    if (f.spec.kind == FaultKind::LinkDegrade && f.spec.target == srv->id) link *= f.spec.value;
  }
  return perf::ResourceProfile(g->peak_flops_per_s * freq / g->nominal_mhz, g->mem_bytes_per_s,
                               link);
}

perf::ResourceProfile Cluster::gpu_profile(std::string_view gpu_id, double t) const {
  std::shared_lock lock(mu_);
  return gpu_profile_locked(gpu_id, t);
}

perf::ResourceProfile Cluster::nominal_gpu_profile(std::string_view gpu_id) const {
  const GpuSpec* g = topology_.find_gpu(gpu_id);
  if (!g) throw NotFoundError("unknown gpu: " + std::string(gpu_id));
  return perf::ResourceProfile(g->peak_flops_per_s, g->mem_bytes_per_s,
                               topology_.server_of_gpu(gpu_id)->nic_bytes_per_s);
}

void Cluster::set_frequency(std::string_view gpu_id, double mhz) {
  const GpuSpec* g = topology_.find_gpu(gpu_id);
  if (!g) throw NotFoundError("unknown gpu: " + std::string(gpu_id));
  if (!(mhz > 0) || mhz > g->nominal_mhz) {
    throw MisuseError("frequency for " + g->id + " must be in (0, " +
                      format_number(g->nominal_mhz) + "] MHz");
  }
  std::unique_lock lock(mu_);
  app_clock_mhz_.find(g->id)->second = mhz;
  std::erase_if(faults_, [&](const ActiveFault& f) {
    return f.spec.kind == FaultKind::GpuFrequencyThrottle && f.spec.target == g->id;
  });
}

JobRun Cluster::run_job(const JobSpec& spec) {
  if (spec.id.empty()) throw MisuseError("job id must not be empty");
  if (spec.gpus.empty()) throw MisuseError("job " + spec.id + " needs at least one gpu");
  if (spec.iterations == 0) throw MisuseError("job " + spec.id + " needs at least one iteration");
  for (const auto& g : spec.gpus) {
    if (!topology_.find_gpu(g)) throw NotFoundError("unknown gpu: " + g);
  }
  std::unique_lock lock(mu_);
  JobRun run;
  run.job_id = spec.id;
  run.gpus = spec.gpus;
  run.start_s = spec.start_s.value_or(now_);
  if (!(run.start_s >= 0)) throw MisuseError("job start must be >= 0");
  double cursor = run.start_s;
  for (std::size_t i = 0; i < spec.iterations; ++i) {
    const DeviceState st = state_at_locked(cursor);
    for (const auto& g : spec.gpus) {
      if (st.gpu(g)->mem_free_bytes <= 0) {
        run.status = JobStatus::Failed;
        run.failure = "out of device memory on " + g + " at t=" + format_number(cursor);
        break;
      }
    }
    if (run.status == JobStatus::Failed) break;
    double worst = -1;
    std::string gating;
    for (const auto& g : spec.gpus) {
      const double t = perf::predict_mix(spec.mix, gpu_profile_locked(g, cursor), config_.rules)
                           .total_seconds;
      if (t > worst) {
        worst = t;
        gating = g;
      }
    }
    const double noise =
        1.0 + config_.noise_amplitude * (2.0 * unit_noise(config_.seed, spec.id, i) - 1.0);
    IterationRecord rec;
    rec.iteration = i;
    rec.start_s = cursor;
    rec.duration_s = worst * noise;
    rec.rate = 1.0 / rec.duration_s;
    rec.gating_gpu = gating;
    run.iterations.push_back(rec);
    cursor += rec.duration_s;
  }
  run.end_s = cursor;
  if (cursor > run.start_s) busy_.push_back({run.start_s, cursor, spec.gpus});
  now_ = std::max(now_, cursor);
  history_.push_back(run);
  std::erase_if(specs_, [&](const JobSpec& s) { return s.id == spec.id; });
  specs_.push_back(spec);
  return run;
}

std::vector<JobRun> Cluster::job_history() const {
  std::shared_lock lock(mu_);
  return history_;
}

std::optional<JobSpec> Cluster::find_job_spec(std::string_view job_id) const {
  std::shared_lock lock(mu_);
  for (const auto& s : specs_)
    if (s.id == job_id) return s;
  return std::nullopt;
}

std::vector<TelemetrySample> Cluster::sample_telemetry(double start, double end) const {
  std::shared_lock lock(mu_);
  if (end > now_ + 1e-9) {
    throw MisuseError("telemetry window ends at " + format_number(end) +
                      " which is after the clock " + format_number(now_));
  }
  std::vector<TelemetrySample> out;
  if (!(start < end)) return out;
  const double period = config_.telemetry_period_s;
  for (double k = std::ceil(std::max(0.0, start) / period); k * period <= end + 1e-12; k += 1) {
    const double t = k * period;
    const DeviceState st = state_at_locked(t);
    for (const auto& g : st.gpus) {
      out.push_back({t, g.id, "freq_mhz", g.freq_mhz});
      out.push_back({t, g.id, "power_w", g.power_w});
      out.push_back({t, g.id, "mem_free_bytes", g.mem_free_bytes});
      out.push_back({t, g.id, "ecc_errors", g.ecc_errors});
      out.push_back({t, g.id, "util", g.utilization});
    }
    for (const auto& s : st.servers) {
      out.push_back({t, s.id, "link_bw", s.link_bytes_per_s});
      out.push_back({t, s.id, "storage_free_bytes", s.storage_free_bytes});
    }
  }
  return out;
}

}  // namespace cdiag::sim
