// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Resource-composition performance model for AI computing tasks.
//
// A task demands M[k] units of each equivalent resource k (FLOP of
// matrix-multiply compute, bytes of memory traffic, bytes of interconnect or
// storage I/O). Hardware supplies N[k] units per second. A task bound to a
// single resource runs N/M times per second; multi-resource tasks combine
// per-resource busy times t[k] = M[k]/N[k] according to which resource pairs
// can overlap in time.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdiag::perf {

enum class ResourceKind : std::size_t { Compute = 0, MemoryBandwidth = 1, IoBandwidth = 2 };

inline constexpr std::size_t kResourceCount = 3;
inline constexpr std::array<ResourceKind, kResourceCount> kAllResources = {
    ResourceKind::Compute, ResourceKind::MemoryBandwidth, ResourceKind::IoBandwidth};

constexpr std::size_t index_of(ResourceKind kind) { return static_cast<std::size_t>(kind); }
std::string_view to_string(ResourceKind kind);

/// Supply rates per resource, units per second. All strictly positive and finite.
class ResourceProfile {
 public:
  ResourceProfile(double compute_flops_per_s, double mem_bytes_per_s, double io_bytes_per_s);

  double rate(ResourceKind kind) const { return rates_[index_of(kind)]; }
  const std::array<double, kResourceCount>& rates() const { return rates_; }

  /// Copy with one resource's rate multiplied by `factor` (> 0).
  ResourceProfile scaled(ResourceKind kind, double factor) const;

  bool operator==(const ResourceProfile&) const = default;

 private:
  std::array<double, kResourceCount> rates_;
};

/// Total requirement per resource. Non-negative, at least one entry positive.
class TaskDemand {
 public:
  TaskDemand(double compute_flops, double mem_bytes, double io_bytes);

  static TaskDemand only(ResourceKind kind, double amount);

  double amount(ResourceKind kind) const { return amounts_[index_of(kind)]; }
  const std::array<double, kResourceCount>& amounts() const { return amounts_; }
  std::size_t positive_count() const;

  bool operator==(const TaskDemand&) const = default;

 private:
  std::array<double, kResourceCount> amounts_;
};

enum class Overlap { Serial, Parallel };

/// Symmetric Serial/Parallel relation over the three unordered resource pairs.
class ParallelismRule {
 public:
  ParallelismRule(Overlap compute_memory, Overlap compute_io, Overlap memory_io);

  /// Compute and memory cannot overlap; I/O overlaps with both.
  static ParallelismRule defaults();
  static ParallelismRule all_serial();
  static ParallelismRule all_parallel();

  /// Relation between two distinct kinds. Throws MisuseError when a == b.
  Overlap between(ResourceKind a, ResourceKind b) const;

  bool operator==(const ParallelismRule&) const = default;

 private:
  Overlap compute_memory_;
  Overlap compute_io_;
  Overlap memory_io_;
};

struct MixPart {
  TaskDemand demand;
  double proportion;
};

/// Proportion-weighted composition of subtasks; proportions sum to 1 within 1e-9.
class WorkloadMix {
 public:
  explicit WorkloadMix(std::vector<MixPart> parts);

  const std::vector<MixPart>& parts() const { return parts_; }
  TaskDemand aggregate() const;

 private:
  std::vector<MixPart> parts_;
};

struct PerfPrediction {
  double rate = 0;           // tasks per second
  double total_seconds = 0;  // modeled time per task
  std::array<double, kResourceCount> busy_seconds{};
  /// The resources whose serial chain realizes the total time, in kind order.
  std::vector<ResourceKind> bottleneck;
};

struct RateEstimate {
  double mean = 0;
  std::size_t count = 0;
  double std_error = 0;
  bool converged = false;
};

struct SlowdownVerdict {
  bool slow = false;
  double ratio = 1.0;  // measured / predicted
};

struct RooflinePoint {
  double intensity;   // FLOP per byte of memory traffic
  double attainable;  // FLOP/s
};

inline constexpr double kDefaultSlowdownThreshold = 0.9;

/// Rate for a task that uses exactly one resource: N0 / M0.
PerfPrediction predict_single(const TaskDemand& demand, const ResourceProfile& profile);

/// Total time = max over Serial-connected resource classes of the summed busy times.
PerfPrediction predict_multi(const TaskDemand& demand, const ResourceProfile& profile,
                             const ParallelismRule& rules);

PerfPrediction predict_mix(const WorkloadMix& mix, const ResourceProfile& profile,
                           const ParallelismRule& rules);

std::vector<RooflinePoint> roofline_curve(const ResourceProfile& profile,
                                          std::span<const double> intensity_grid);

/// Two-column "intensity attainable" table, one row per point.
std::string roofline_table(std::span<const RooflinePoint> curve);

/// Mean of samples after dropping `warmup_count` leading ones.
///
/// Throws InsufficientDataError when fewer than max(warmup_count + 1,
/// min_samples) samples are supplied. Converged requires at least
/// `min_samples` post-warm-up samples and std_error / mean < tolerance.
RateEstimate estimate_rate(std::span<const double> samples, std::size_t warmup_count,
                           double tolerance, std::size_t min_samples);

/// Slow iff measured < threshold * predicted rate.
SlowdownVerdict detect_slowdown(const PerfPrediction& predicted, double measured_rate,
                                double threshold = kDefaultSlowdownThreshold);

/// Finds the proportion p of a two-part mix (a task bound to the degraded
/// resource plus a task bound to an unaffected one, each taking one second on
/// `base`) whose degraded/base rate ratio equals `target_ratio`.
WorkloadMix calibrate_mix_for_ratio(const ResourceProfile& base, const ResourceProfile& degraded,
                                    double target_ratio, const ParallelismRule& rules);

}  // namespace cdiag::perf
