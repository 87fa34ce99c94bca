// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/perf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cdiag/common/error.hpp"
#include "cdiag/common/text.hpp"

namespace cdiag::perf {

std::string_view to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::Compute:
      return "compute";
    case ResourceKind::MemoryBandwidth:
      return "memory";
    case ResourceKind::IoBandwidth:
      return "io";
  }
  return "unknown";
}

ResourceProfile::ResourceProfile(double compute_flops_per_s, double mem_bytes_per_s,
                                 double io_bytes_per_s)
    : rates_{compute_flops_per_s, mem_bytes_per_s, io_bytes_per_s} {
  for (ResourceKind k : kAllResources) {
    double r = rates_[index_of(k)];
    if (!(r > 0) || !std::isfinite(r)) {
      throw MisuseError("supply rate for " + std::string(to_string(k)) +
                        " must be positive and finite, got " + format_number(r));
    }
  }
}

ResourceProfile ResourceProfile::scaled(ResourceKind kind, double factor) const {
  auto r = rates_;
  r[index_of(kind)] *= factor;
  return ResourceProfile(r[0], r[1], r[2]);
}

TaskDemand::TaskDemand(double compute_flops, double mem_bytes, double io_bytes)
    : amounts_{compute_flops, mem_bytes, io_bytes} {
  bool any_positive = false;
  for (ResourceKind k : kAllResources) {
    double m = amounts_[index_of(k)];
    if (!(m >= 0) || !std::isfinite(m)) {
      throw MisuseError("demand for " + std::string(to_string(k)) +
                        " must be non-negative and finite, got " + format_number(m));
    }
    any_positive = any_positive || m > 0;
  }
  if (!any_positive) throw MisuseError("task demand must have at least one positive entry");
}

TaskDemand TaskDemand::only(ResourceKind kind, double amount) {
  std::array<double, kResourceCount> a{};
  a[index_of(kind)] = amount;
  return TaskDemand(a[0], a[1], a[2]);
}

std::size_t TaskDemand::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(amounts_.begin(), amounts_.end(), [](double m) { return m > 0; }));
}

ParallelismRule::ParallelismRule(Overlap compute_memory, Overlap compute_io, Overlap memory_io)
    : compute_memory_(compute_memory), compute_io_(compute_io), memory_io_(memory_io) {}

ParallelismRule ParallelismRule::defaults() {
  return {Overlap::Serial, Overlap::Parallel, Overlap::Parallel};
}
ParallelismRule ParallelismRule::all_serial() {
  return {Overlap::Serial, Overlap::Serial, Overlap::Serial};
}
ParallelismRule ParallelismRule::all_parallel() {
  return {Overlap::Parallel, Overlap::Parallel, Overlap::Parallel};
}

Overlap ParallelismRule::between(ResourceKind a, ResourceKind b) const {
  if (a == b) throw MisuseError("overlap relation is defined only for distinct resources");
  auto lo = std::min(index_of(a), index_of(b));
  auto hi = std::max(index_of(a), index_of(b));
  if (lo == 0 && hi == 1) return compute_memory_;
  if (lo == 0 && hi == 2) return compute_io_;
  return memory_io_;
}

WorkloadMix::WorkloadMix(std::vector<MixPart> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw MisuseError("workload mix must contain at least one subtask");
  double sum = 0;
  for (const auto& p : parts_) {
    if (!(p.proportion >= 0 && p.proportion <= 1)) {
      throw MisuseError("mix proportion must lie in [0,1], got " + format_number(p.proportion));
    }
    sum += p.proportion;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw MisuseError("mix proportions must sum to 1, got " + format_number(sum));
  }
}

TaskDemand WorkloadMix::aggregate() const {
  std::array<double, kResourceCount> total{};
  for (const auto& p : parts_) {
    for (std::size_t i = 0; i < kResourceCount; ++i) total[i] += p.proportion * p.demand.amounts()[i];
  }
  return TaskDemand(total[0], total[1], total[2]);
}

PerfPrediction predict_single(const TaskDemand& demand, const ResourceProfile& profile) {
  if (demand.positive_count() != 1) {
    std::string names;
    for (ResourceKind k : kAllResources) {
      if (demand.amount(k) > 0) {
        if (!names.empty()) names += ", ";
        names += std::string(to_string(k)) + "=" + format_number(demand.amount(k));
      }
    }
    throw MisuseError("single-resource prediction needs exactly one positive demand entry; got " +
                      std::to_string(demand.positive_count()) + " (" + names + ")");
  }
  PerfPrediction out;
  for (ResourceKind k : kAllResources) {
    double m = demand.amount(k);
    if (m > 0) {
      out.rate = profile.rate(k) / m;
      out.busy_seconds[index_of(k)] = m / profile.rate(k);
      out.total_seconds = out.busy_seconds[index_of(k)];
      out.bottleneck = {k};
    }
  }
  return out;
}

namespace {

// Connected components of the Serial relation restricted to resources with
// positive busy time. Components are listed in order of their smallest kind.
std::vector<std::vector<ResourceKind>> serial_classes(const std::array<double, kResourceCount>& busy,
                                                      const ParallelismRule& rules) {
  std::array<std::size_t, kResourceCount> parent{0, 1, 2};
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < kResourceCount; ++a) {
    for (std::size_t b = a + 1; b < kResourceCount; ++b) {
      if (busy[a] > 0 && busy[b] > 0 &&
          rules.between(kAllResources[a], kAllResources[b]) == Overlap::Serial) {
        parent[find(b)] = find(a);
      }
    }
  }
  std::vector<std::vector<ResourceKind>> classes;
  std::array<int, kResourceCount> slot{-1, -1, -1};
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    if (!(busy[k] > 0)) continue;
    auto root = find(k);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<std::size_t>(slot[root])].push_back(kAllResources[k]);
  }
  return classes;
}

}  // namespace

PerfPrediction predict_multi(const TaskDemand& demand, const ResourceProfile& profile,
                             const ParallelismRule& rules) {
  PerfPrediction out;
  for (ResourceKind k : kAllResources) {
    out.busy_seconds[index_of(k)] = demand.amount(k) / profile.rate(k);
  }
  double best = -1;
  for (auto& cls : serial_classes(out.busy_seconds, rules)) {
    double sum = 0;
    for (ResourceKind k : cls) sum += out.busy_seconds[index_of(k)];
    if (sum > best) {
      best = sum;
      out.bottleneck = cls;
    }
  }
  out.total_seconds = best;
  out.rate = 1.0 / best;
  return out;
}

PerfPrediction predict_mix(const WorkloadMix& mix, const ResourceProfile& profile,
                           const ParallelismRule& rules) {
  return predict_multi(mix.aggregate(), profile, rules);
}

std::vector<RooflinePoint> roofline_curve(const ResourceProfile& profile,
                                          std::span<const double> intensity_grid) {
  if (intensity_grid.empty()) throw MisuseError("roofline grid must not be empty");
  std::vector<RooflinePoint> out;
  out.reserve(intensity_grid.size());
  const double peak = profile.rate(ResourceKind::Compute);
  const double bw = profile.rate(ResourceKind::MemoryBandwidth);
  for (double intensity : intensity_grid) {
    if (!(intensity > 0) || !std::isfinite(intensity)) {
      throw MisuseError("arithmetic intensity must be positive and finite, got " +
                        format_number(intensity));
    }
    out.push_back({intensity, std::min(peak, intensity * bw)});
  }
  return out;
}

std::string roofline_table(std::span<const RooflinePoint> curve) {
  std::ostringstream os;
  os << "# intensity_flop_per_byte attainable_flops_per_s\n";
  for (const auto& p : curve) os << format_number(p.intensity) << ' ' << format_number(p.attainable) << '\n';
  return os.str();
}

RateEstimate estimate_rate(std::span<const double> samples, std::size_t warmup_count,
                           double tolerance, std::size_t min_samples) {
  const std::size_t required = std::max(warmup_count + 1, min_samples);
  if (samples.size() < required) throw InsufficientDataError(samples.size(), required);

  auto kept = samples.subspan(warmup_count);
  RateEstimate est;
  est.count = kept.size();
  est.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(est.count);
  if (est.count > 1) {
    double ss = 0;
    for (double s : kept) ss += (s - est.mean) * (s - est.mean);
    double sd = std::sqrt(ss / static_cast<double>(est.count - 1));
    est.std_error = sd / std::sqrt(static_cast<double>(est.count));
  } else {
    est.std_error = std::numeric_limits<double>::infinity();
  }
  est.converged = est.count >= min_samples && est.mean > 0 &&
                  est.std_error / est.mean < tolerance;
  return est;
}

SlowdownVerdict detect_slowdown(const PerfPrediction& predicted, double measured_rate,
                                double threshold) {
  if (!(measured_rate > 0)) throw MisuseError("measured rate must be positive");
  if (!(threshold > 0 && threshold < 1)) throw MisuseError("slowdown threshold must lie in (0,1)");
  SlowdownVerdict v;
  v.ratio = measured_rate / predicted.rate;
  v.slow = measured_rate < threshold * predicted.rate;
  return v;
}

WorkloadMix calibrate_mix_for_ratio(const ResourceProfile& base, const ResourceProfile& degraded,
                                    double target_ratio, const ParallelismRule& rules) {
  std::optional<ResourceKind> changed;
  for (ResourceKind k : kAllResources) {
    if (base.rate(k) != degraded.rate(k)) {
      if (changed) throw MisuseError("degraded profile must differ from base in exactly one resource");
      changed = k;
    }
  }
  if (!changed) throw MisuseError("degraded profile must differ from base in exactly one resource");
  const ResourceKind hit = *changed;
  const double floor_ratio = degraded.rate(hit) / base.rate(hit);
  if (floor_ratio >= 1) throw MisuseError("degraded profile must supply less of the changed resource");

  // Partner: prefer a resource that cannot overlap with the degraded one.
  std::optional<ResourceKind> partner;
  for (ResourceKind k : kAllResources) {
    if (k != hit && rules.between(hit, k) == Overlap::Serial) {
      partner = k;
      break;
    }
  }
  if (!partner) {
    for (ResourceKind k : kAllResources) {
      if (k != hit) {
        partner = k;
        break;
      }
    }
  }

  const TaskDemand bound = TaskDemand::only(hit, base.rate(hit));
  const TaskDemand other = TaskDemand::only(*partner, base.rate(*partner));
  auto make = [&](double p) { return WorkloadMix({{bound, p}, {other, 1.0 - p}}); };
  auto ratio = [&](double p) {
    auto mix = make(p);
    return predict_mix(mix, degraded, rules).rate / predict_mix(mix, base, rules).rate;
  };

  if (!(target_ratio >= floor_ratio && target_ratio <= 1.0)) {
    throw NoSolutionError(target_ratio, floor_ratio, 1.0);
  }
  if (target_ratio == floor_ratio) return make(1.0);

  // ratio(p) is non-increasing in p: ratio(0) = 1, ratio(1) = floor_ratio.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    double mid = 0.5 * (lo + hi);
    if (ratio(mid) > target_ratio) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double p = std::fabs(ratio(lo) - target_ratio) <= std::fabs(ratio(hi) - target_ratio) ? lo : hi;
  return make(p);
}

}  // namespace cdiag::perf
