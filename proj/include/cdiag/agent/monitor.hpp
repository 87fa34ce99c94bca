// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Alert sources. Power: at each telemetry sample, gpus are grouped by
// utilization and any gpu whose power leaves median * (1 +/- band) of its
// group is flagged. Slowdown: each finished job's iteration rates are
// compared against the model prediction on nominal hardware. Alerts with the
// same (source, device, job) key are suppressed inside the cooldown window.

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cdiag/sim/checks.hpp"
#include "cdiag/sim/cluster.hpp"

namespace cdiag::agent {

enum class AlertSource { PowerAnomaly, SlowdownVerdict, CheckFailure, ManualLog };

std::string_view to_string(AlertSource s);
AlertSource alert_source_from_string(std::string_view name);

struct Alert {
  std::string id;
  AlertSource source = AlertSource::ManualLog;
  std::string device;  // may be empty for manual logs
  std::string job;
  std::string evidence;
  double raised_at_s = 0;
  bool operator==(const Alert&) const = default;
};

struct MonitorConfig {
  double power_band = 0.2;
  std::size_t min_group = 3;  // smallest utilization group with a meaningful median
  double cooldown_s = 300;
  double slowdown_threshold = 0.9;
  std::size_t warmup_iterations = 1;
  double rate_tolerance = 0.05;
  std::size_t min_samples = 3;
};

class Monitor {
 public:
  explicit Monitor(const sim::Cluster& cluster, MonitorConfig config = {});

  /// Scans telemetry since the previous poll and jobs finished since then.
  /// Never throws on cluster data; unusable jobs are skipped.
  std::vector<Alert> poll();

  /// Operator-supplied log text. Throws MisuseError on empty evidence.
  Alert raise_manual(std::string evidence, std::string device = "");
  /// Alert for a failed check; nullopt for a passing one or inside cooldown.
  std::optional<Alert> raise_check_failure(const sim::CheckResult& result);

  std::vector<Alert> alerts() const;
  std::optional<Alert> find(std::string_view id) const;
  const MonitorConfig& config() const { return config_; }

 private:
  std::optional<Alert> emit_locked(AlertSource source, std::string device, std::string job,
                                   std::string evidence, double t);
  void scan_power_locked(double start, double end, std::vector<Alert>& out);
  void scan_jobs_locked(std::vector<Alert>& out);

  const sim::Cluster& cluster_;
  MonitorConfig config_;
  mutable std::mutex mu_;
  double scanned_until_ = -1;
  std::size_t jobs_seen_ = 0;
  std::size_t next_id_ = 1;
  std::map<std::tuple<AlertSource, std::string, std::string>, double> last_raised_;
  std::vector<Alert> alerts_;
};

}  // namespace cdiag::agent
