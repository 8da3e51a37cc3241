#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "tda/channel.hpp"
#include "tda/config.hpp"
#include "tda/performance_table.hpp"

namespace tda {

struct CoordinatorConfig {
  double heartbeat_interval_s = 2.0;
  double staleness_window_s = 0.0;  // 0 means 3 x heartbeat interval
  double half_life_s = 30.0;
  double epsilon_floor = 1e-6;
  std::size_t history_bound = 64;
  std::string snapshot_path;  // empty disables persistence

  double staleness() const {
    return staleness_window_s > 0.0 ? staleness_window_s : 3.0 * heartbeat_interval_s;
  }
  HomogenizeParams homogenize_params() const { return {half_life_s, epsilon_floor}; }
};

// Keys: heartbeat_interval_s, staleness_window_s, half_life_s, epsilon_floor,
// history_bound, snapshot_path.
CoordinatorConfig coordinator_config_from(const KeyValues& kv);

struct JobRecord {
  std::uint64_t job_id = 0;
  Endpoint client_endpoint;
  std::string workload_kind;
  std::uint64_t total_load = 0;
  ScopePlan plan;
  double dispatched_at = 0.0;
  Policy policy = Policy::Homogenized;
};

// The server of the triangle: owns the performance table, granulates job
// requests into sub-requests and points providers at the requesting client.
// All table mutation happens under one lock; planning reads snapshots.
class Coordinator {
public:
  Coordinator(CoordinatorConfig config, Transport& transport);

  void set_clock(std::function<double()> now_fn) { now_ = std::move(now_fn); }

  void register_provider(const std::string& id, const Endpoint& endpoint,
                         std::vector<std::string> services);

  // Stamps the sample with the coordinator's clock. Unknown providers are
  // dropped and logged, not propagated.
  void ingest_heartbeat(const std::string& provider_id, const HeartbeatBody& hb);

  // Plans over fresh, capable providers. Throws NoProviders when none.
  JobRecord plan_job(std::uint64_t job_id, const JobRequestBody& request);

  // Plan, dispatch sub-requests (one replan retry on unreachable providers),
  // then answer the client with JOB_ACCEPTED or ERROR.
  void handle_job_request(std::uint64_t job_id, const JobRequestBody& request, Channel& client);

  StatusReplyBody status() const;
  std::size_t provider_count() const;
  std::optional<JobRecord> job(std::uint64_t job_id) const;

  // Reads one connection until it closes, reacting to each message.
  void serve_connection(Channel& ch);

  const CoordinatorConfig& config() const { return config_; }

private:
  struct ProviderLink {
    std::mutex mu;  // serializes writers on the shared dispatch channel
    std::unique_ptr<Channel> channel;
  };

  // Connects (caching the channel) and records connect time as RTT.
  // Returns nullptr when unreachable.
  ProviderLink* link_for(const std::string& id, const Endpoint& endpoint);
  void drop_link(const std::string& id);
  void snapshot_locked();

  CoordinatorConfig config_;
  Transport& transport_;
  std::function<double()> now_;

  mutable std::mutex mu_;  // guards table_ and jobs_
  PerformanceTable table_;
  std::map<std::uint64_t, JobRecord> jobs_;

  std::mutex links_mu_;
  std::map<std::string, std::unique_ptr<ProviderLink>> links_;
};

// Accept loop plus one reader thread per connection.
class CoordinatorServer {
public:
  CoordinatorServer(CoordinatorConfig config, Transport& transport, const Endpoint& listen);
  ~CoordinatorServer();

  void start();
  void stop();
  Endpoint endpoint() const { return listener_->local_endpoint(); }
  Coordinator& core() { return core_; }

private:
  Coordinator core_;
  std::unique_ptr<Listener> listener_;
  std::thread accept_thread_;
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Channel>> conns_;
  std::vector<std::thread> conn_threads_;
  std::atomic<bool> stopping_{false};
};

}  // namespace tda
