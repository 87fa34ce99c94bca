// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/gateway/service.hpp"

#include "cdiag/agent/drill.hpp"
#include "cdiag/bench/harness.hpp"
#include "cdiag/common/error.hpp"
#include "cdiag/dot/xml.hpp"
#include "cdiag/sim/io.hpp"

namespace cdiag::gateway {

using nlohmann::json;

namespace {

sim::ClusterConfig cluster_config(const ServiceConfig& c) {
  sim::ClusterConfig cc;
  cc.seed = c.cluster_seed;
  return cc;
}

agent::SessionConfig session_config(const ServiceConfig& c) {
  agent::SessionConfig s;
  if (!c.whitelist.empty()) s.whitelist = c.whitelist;
  s.approval_timeout_s = c.approval_timeout_s;
  s.wall_seconds_per_sim_second = c.wall_seconds_per_sim_second;
  return s;
}

json session_summary(const agent::SelfPlaySession& s) {
  json j{{"id", s.id},
         {"alert_id", s.alert.id},
         {"alert_source", std::string(agent::to_string(s.alert.source))},
         {"device", s.alert.device},
         {"status", std::string(agent::to_string(s.status))},
         {"rounds", s.rounds.size()},
         {"failed_round", s.failed_round},
         {"failure", s.failure},
         {"test_cases", s.test_cases},
         {"verdict", nullptr}};
  if (s.verdict) j["verdict"] = agent::to_json(*s.verdict);
  return j;
}

json summary_from_document(const json& d) {
  return {{"id", d.value("id", "")},
          {"alert_id", d.contains("alert") ? d["alert"].value("id", "") : ""},
          {"alert_source", d.contains("alert") ? d["alert"].value("source", "") : ""},
          {"device", d.contains("alert") ? d["alert"].value("device", "") : ""},
          {"status", d.value("status", "")},
          {"rounds", d.contains("rounds") ? d["rounds"].size() : 0},
          {"failed_round", d.value("failed_round", 0)},
          {"failure", d.value("failure", "")},
          {"test_cases", d.value("test_cases", 0)},
          {"verdict", d.contains("verdict") ? d["verdict"] : json(nullptr)}};
}

}  // namespace

Service::Service(ServiceConfig config) : Service(config, nullptr) {}

Service::Service(ServiceConfig config, std::unique_ptr<agent::Backend> backend)
    : config_((validate(config), std::move(config))),
      cluster_(std::make_unique<sim::Cluster>(sim::load_topology(config_.topology_path),
                                              cluster_config(config_))),
      kb_(kb::load_knowledge_base(config_.corpus_path, config_.heldout_fraction,
                                  config_.split_seed)),
      backend_(backend ? std::move(backend) : make_backend(config_.backend)),
      store_(config_.session_dir),
      monitor_(*cluster_) {
  if (!config_.bench_items_path.empty()) items_ = bench::load_items(config_.bench_items_path);
  orchestrator_ = std::make_unique<agent::Orchestrator>(*cluster_, *backend_, *kb_, approvals_,
                                                        session_config(config_), &store_);
  orchestrator_->add_listener([this](const agent::SelfPlaySession& s) { on_session(s); });
  approvals_.add_listener([this](const agent::ApprovalRequest& r) {
    bus_.publish(r.status == agent::ApprovalStatus::Pending ? EventKind::ApprovalRequested
                                                            : EventKind::ApprovalDecided,
                 agent::to_json(r));
  });
}

Service::~Service() { stop(); }

void Service::start() {
  if (ticking_.exchange(true)) return;
  ticker_ = std::thread([this] { ticker(); });
}

void Service::ticker() {
  std::unique_lock lock(ticker_mu_);
  while (ticking_) {
    ticker_cv_.wait_for(lock, std::chrono::milliseconds(config_.tick_interval_ms));
    if (!ticking_) break;
    lock.unlock();
    tick();
    lock.lock();
  }
}

void Service::stop() {
  if (ticking_.exchange(false)) {
    ticker_cv_.notify_all();
    ticker_.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    workers.swap(workers_);
  }
  // Rejecting until no worker is left unblocks sessions that submit new
  // requests while shutting down.
  for (auto& w : workers) {
    while (true) {
      for (const auto& r : approvals_.list(agent::ApprovalStatus::Pending)) {
        try {
          approvals_.decide(r.id, false, "shutdown", cluster_->now());
        } catch (const ConflictError&) {
        }
      }
      std::unique_lock lock(mu_);
      if (idle_cv_.wait_for(lock, std::chrono::milliseconds(20), [&] { return in_flight_ == 0; }))
        break;
    }
    w.join();
  }
  bus_.shutdown();
}

std::vector<agent::Alert> Service::tick() {
  std::lock_guard tick_lock(tick_mu_);
  const double start = cluster_->now();
  cluster_->advance(config_.sim_seconds_per_tick);
  const double end = cluster_->now();
  const auto raised = monitor_.poll();
  for (const auto& a : raised) bus_.publish(EventKind::AlertRaised, agent::to_json(a));

  json samples = json::array();
  for (const auto& s : cluster_->sample_telemetry(start, end)) {
    if (s.time_s > start) samples.push_back(sim::to_json(s));
  }
  bus_.publish(EventKind::TelemetryPage,
               {{"start_s", start}, {"end_s", end}, {"samples", samples}});

  if (config_.auto_diagnose) {
    for (const auto& a : raised) launch(a);
  }
  return raised;
}

void Service::launch(const agent::Alert& alert) {
  std::lock_guard lock(mu_);
  if (stopping_) return;
  if (!alert.device.empty()) {
    const auto [it, fresh] = busy_devices_.emplace(alert.device, alert.id);
    if (!fresh) {
      folded_[alert.id] = it->second;
      return;
    }
  }
  ++in_flight_;
  workers_.emplace_back([this, alert] {
    try {
      orchestrator_->run_session(alert);
    } catch (const std::exception&) {
      // Recorded on the session itself; the worker only has to release the device.
    }
    std::lock_guard done(mu_);
    busy_devices_.erase(alert.device);
    --in_flight_;
    idle_cv_.notify_all();
  });
}

bool Service::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return idle_cv_.wait_for(lock, timeout, [&] { return in_flight_ == 0; });
}

void Service::on_session(const agent::SelfPlaySession& s) {
  bool verdict_now = false;
  {
    std::lock_guard lock(mu_);
    sessions_[s.id] = s;
    alert_session_[s.alert.id] = s.id;
    if (s.status == agent::SessionStatus::Completed && s.verdict) {
      verdict_now = verdicts_published_.insert(s.id).second;
    }
  }
  bus_.publish(EventKind::SessionUpdated, session_summary(s));
  if (verdict_now) {
    bus_.publish(EventKind::VerdictIssued,
                 {{"session_id", s.id}, {"verdict", agent::to_json(*s.verdict)}});
  }
}

json Service::telemetry(double window_s) const {
  if (!(window_s > 0) || window_s > 3600) throw MisuseError("window must be in (0, 3600] s");
  const double end = cluster_->now();
  const double start = std::max(0.0, end - window_s);
  json samples = json::array();
  for (const auto& s : cluster_->sample_telemetry(start, end)) samples.push_back(sim::to_json(s));
  return {{"start_s", start}, {"end_s", end}, {"samples", samples}};
}

json Service::alerts() const {
  const auto all = monitor_.alerts();
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& a : all) {
    json j = agent::to_json(a);
    const auto f = folded_.find(a.id);
    const auto it = alert_session_.find(f == folded_.end() ? a.id : f->second);
    j["session_id"] = it == alert_session_.end() ? json(nullptr) : json(it->second);
    out.push_back(std::move(j));
  }
  return out;
}

json Service::sessions() const {
  std::map<std::string, json> rows;
  for (const auto& id : store_.list()) {
    try {
      rows[id] = summary_from_document(store_.load(id));
    } catch (const std::exception&) {
      // Unreadable leftovers from another run are not listed.
    }
  }
  std::lock_guard lock(mu_);
  for (const auto& [id, s] : sessions_) rows[id] = session_summary(s);
  json out = json::array();
  for (auto& [id, j] : rows) out.push_back(std::move(j));
  return out;
}

json Service::session(std::string_view id) const {
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(std::string(id));
    if (it != sessions_.end()) {
      json j = agent::to_json(it->second);
      j["dot_xml"] = dot::serialize(it->second.graph);
      return j;
    }
  }
  json j = store_.load(id);
  j["dot_xml"] = store_.read(id, agent::kDotFile);
  return j;
}

json Service::approvals(std::optional<agent::ApprovalStatus> status) const {
  json out = json::array();
  for (const auto& r : approvals_.list(status)) out.push_back(agent::to_json(r));
  return out;
}

json Service::decide(std::string_view id, bool approve, const std::string& decider) {
  return agent::to_json(approvals_.decide(id, approve, decider, cluster_->now()));
}

json Service::inject(const json& body) {
  if (!body.is_object()) throw MisuseError("fault body must be an object");
  if (body.contains("drill")) {
    const json& d = body.at("drill");
    if (!d.is_object()) throw MisuseError("drill must be an object");
    agent::DrillPlan plan;
    try {
      plan.gpu = d.value("gpu", plan.gpu);
      plan.throttle_mhz = d.value("throttle_mhz", plan.throttle_mhz);
      plan.target_ratio = d.value("target_ratio", plan.target_ratio);
      plan.iterations = d.value("iterations", plan.iterations);
      plan.job_id = d.value("job_id", plan.job_id);
    } catch (const json::exception& e) {
      throw MisuseError(std::string("drill: ") + e.what());
    }
    if (!cluster_->topology().find_gpu(plan.gpu))
      throw MisuseError("drill: unknown gpu " + plan.gpu);
    const auto fault_id = cluster_->inject_fault(agent::drill_fault(*cluster_, plan));
    const auto run = cluster_->run_job(agent::drill_job(*cluster_, plan));
    json job = sim::to_json(run);
    job.erase("iterations");
    double sum = 0;
    for (const auto& it : run.iterations) sum += it.rate;
    job["mean_rate"] =
        run.iterations.empty() ? 0.0 : sum / static_cast<double>(run.iterations.size());
    return {{"fault_id", fault_id}, {"job", job}};
  }
  sim::FaultSpec spec;
  try {
    spec = sim::fault_from_json(body);
  } catch (const json::exception& e) {
    throw MisuseError(std::string("fault: ") + e.what());
  }
  return {{"fault_id", cluster_->inject_fault(spec)}};
}

json Service::run_bench(const json& body) {
  if (!body.is_object()) throw MisuseError("bench body must be an object");
  if (items_.empty()) throw MisuseError("no benchmark items configured");
  std::string backend_name, visibility;
  bench::HarnessConfig hc;
  try {
    backend_name = body.value("backend", "oracle");
    visibility = body.value("visibility", "faireval");
    hc.rag = body.value("rag", false);
    hc.rag_k = body.value("rag_k", hc.rag_k);
  } catch (const json::exception& e) {
    throw MisuseError(std::string("bench: ") + e.what());
  }
  const kb::Visibility v = kb::visibility_from_string(visibility);
  std::lock_guard lock(bench_mu_);
  bench::ScoreReport report;
  if (backend_name == "service") {
    report = bench::run_benchmark(items_, *backend_, v, kb_.get(), hc);
  } else if (backend_name == "oracle" || backend_name == "empty") {
    auto b = make_bench_backend(backend_name, items_);
    report = bench::run_benchmark(items_, *b, v, kb_.get(), hc);
  } else {
    throw MisuseError("bench backend must be oracle, empty or service");
  }
  json j = bench::to_json(report);
  j["table"] = bench::render_table(report);
  return j;
}

json Service::health() const {
  std::lock_guard lock(mu_);
  return {{"status", "ok"},
          {"now_s", cluster_->now()},
          {"last_seq", bus_.last_seq()},
          {"sessions_in_flight", in_flight_},
          {"backend", backend_->name()}};
}

}  // namespace cdiag::gateway
