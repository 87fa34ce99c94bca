// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/agent/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"
#include "cdiag/perf/model.hpp"

namespace cdiag::agent {

std::string_view to_string(AlertSource s) {
  switch (s) {
    case AlertSource::PowerAnomaly: return "power_anomaly";
    case AlertSource::SlowdownVerdict: return "slowdown_verdict";
    case AlertSource::CheckFailure: return "check_failure";
    case AlertSource::ManualLog: return "manual_log";
  }
  return "?";
}

AlertSource alert_source_from_string(std::string_view name) {
  for (auto s : {AlertSource::PowerAnomaly, AlertSource::SlowdownVerdict, AlertSource::CheckFailure,
                 AlertSource::ManualLog}) {
    if (to_string(s) == name) return s;
  }
  throw MisuseError("unknown alert source '" + std::string(name) + "'");
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string signed_percent(double fraction) {
  const double pct = std::round(fraction * 1000) / 10;
  return (pct >= 0 ? "+" : "") + format_number(pct) + "%";
}

}  // namespace

Monitor::Monitor(const sim::Cluster& cluster, MonitorConfig config)
    : cluster_(cluster), config_(config) {
  if (!(config_.power_band > 0)) throw MisuseError("monitor: power_band must be positive");
  if (config_.cooldown_s < 0) throw MisuseError("monitor: cooldown_s must be >= 0");
  if (config_.min_group < 2) throw MisuseError("monitor: min_group must be at least 2");
}

std::optional<Alert> Monitor::emit_locked(AlertSource source, std::string device, std::string job,
                                          std::string evidence, double t) {
  auto key = std::make_tuple(source, device, job);
  if (auto it = last_raised_.find(key);
      it != last_raised_.end() && t - it->second < config_.cooldown_s) {
    return std::nullopt;
  }
  last_raised_[key] = t;
  Alert a{"a-" + std::to_string(next_id_++),
          source,
          std::move(device),
          std::move(job),
          std::move(evidence),
          t};
  alerts_.push_back(a);
  return a;
}

void Monitor::scan_power_locked(double start, double end, std::vector<Alert>& out) {
  const auto samples = cluster_.sample_telemetry(start, end);
  // Samples arrive time-major; collect one snapshot per timestamp.
  std::size_t i = 0;
  while (i < samples.size()) {
    const double t = samples[i].time_s;
    std::map<std::string, double> power, util;
    for (; i < samples.size() && samples[i].time_s == t; ++i) {
      const auto& s = samples[i];
      if (s.metric == "power_w") power[s.device] = s.value;
      if (s.metric == "util") util[s.device] = s.value;
    }
    if (t <= scanned_until_) continue;
    std::map<double, std::vector<std::string>> groups;
    for (const auto& [dev, u] : util) {
      if (power.count(dev)) groups[u].push_back(dev);
    }
    for (const auto& [u, devs] : groups) {
      if (u <= 0 || devs.size() < config_.min_group) continue;
      std::vector<double> values;
      for (const auto& d : devs) values.push_back(power[d]);
      const double med = median(values);
      for (const auto& d : devs) {
        const double dev_frac = (power[d] - med) / med;
        if (std::abs(dev_frac) <= config_.power_band) continue;
        auto evidence = d + " power_w " + format_number(power[d]) + " at t=" + format_number(t) +
                        " s vs fleet median " + format_number(med) + " W under util " +
                        format_number(u) + " (" + signed_percent(dev_frac) + ", band +/-" +
                        format_number(config_.power_band * 100) + "%)";
        if (auto a = emit_locked(AlertSource::PowerAnomaly, d, "", std::move(evidence), t)) {
          out.push_back(*a);
        }
      }
    }
  }
}

void Monitor::scan_jobs_locked(std::vector<Alert>& out) {
  const auto history = cluster_.job_history();
  for (; jobs_seen_ < history.size(); ++jobs_seen_) {
    const auto& run = history[jobs_seen_];
    if (run.status != sim::JobStatus::Completed || run.gpus.empty()) continue;
    const auto spec = cluster_.find_job_spec(run.job_id);
    if (!spec) continue;
    std::vector<double> rates;
    std::map<std::string, std::size_t> gating;
    for (const auto& it : run.iterations) {
      rates.push_back(it.rate);
      ++gating[it.gating_gpu];
    }
    perf::RateEstimate est;
    try {
      est = perf::estimate_rate(rates, config_.warmup_iterations, config_.rate_tolerance,
                                config_.min_samples);
    } catch (const InsufficientDataError&) {
      continue;
    }
    // Nominal prediction: the slowest healthy gpu of the job gates each step.
    perf::PerfPrediction predicted;
    bool first = true;
    for (const auto& g : run.gpus) {
      auto p =
          perf::predict_mix(spec->mix, cluster_.nominal_gpu_profile(g), cluster_.config().rules);
      if (first || p.rate < predicted.rate) predicted = p;
      first = false;
    }
    const auto verdict = perf::detect_slowdown(predicted, est.mean, config_.slowdown_threshold);
    if (!verdict.slow) continue;
    std::string culprit;
    std::size_t most = 0;
    for (const auto& [g, n] : gating) {
      if (n > most) {
        most = n;
        culprit = g;
      }
    }
    auto evidence = "job " + run.job_id + ": measured " + format_number(est.mean) +
                    " iter/s vs predicted " + format_number(predicted.rate) + " iter/s (ratio " +
                    format_number(verdict.ratio) + ", threshold " +
                    format_number(config_.slowdown_threshold) + "); gating gpu " + culprit +
                    " in " + std::to_string(most) + " of " + std::to_string(run.iterations.size()) +
                    " iterations";
    if (auto a = emit_locked(AlertSource::SlowdownVerdict, culprit, run.job_id, std::move(evidence),
                             run.end_s)) {
      out.push_back(*a);
    }
  }
}

std::vector<Alert> Monitor::poll() {
  std::lock_guard lock(mu_);
  std::vector<Alert> out;
  const double now = cluster_.now();
  try {
    if (now > scanned_until_) {
      scan_power_locked(std::max(0.0, scanned_until_), now, out);
      scanned_until_ = now;
    }
    scan_jobs_locked(out);
  } catch (const std::exception&) {
    // Monitoring must not take the cluster loop down; a bad window is skipped.
    scanned_until_ = now;
  }
  return out;
}

Alert Monitor::raise_manual(std::string evidence, std::string device) {
  if (trim(evidence).empty()) throw MisuseError("alert evidence must be non-empty");
  std::lock_guard lock(mu_);
  Alert a{"a-" + std::to_string(next_id_++),
          AlertSource::ManualLog,
          std::move(device),
          "",
          std::move(evidence),
          cluster_.now()};
  alerts_.push_back(a);
  return a;
}

std::optional<Alert> Monitor::raise_check_failure(const sim::CheckResult& result) {
  if (result.pass) return std::nullopt;
  std::lock_guard lock(mu_);
  const auto device = result.failing_devices.empty() ? "" : result.failing_devices.front();
  auto evidence = result.capability + " " + std::string(sim::to_string(result.dimension)) +
                  " failed: " + result.evidence;
  return emit_locked(AlertSource::CheckFailure, device, "", std::move(evidence), cluster_.now());
}

std::vector<Alert> Monitor::alerts() const {
  std::lock_guard lock(mu_);
  return alerts_;
}

std::optional<Alert> Monitor::find(std::string_view id) const {
  std::lock_guard lock(mu_);
  for (const auto& a : alerts_) {
    if (a.id == id) return a;
  }
  return std::nullopt;
}

}  // namespace cdiag::agent
