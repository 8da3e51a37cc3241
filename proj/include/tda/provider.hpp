#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "tda/channel.hpp"

namespace tda {

struct ProviderConfig {
  std::string id;
  Endpoint coordinator;
  Endpoint listen;  // port 0 asks for an ephemeral port
  double heartbeat_interval_s = 2.0;
  double calibration_override = 0.0;  // > 0 skips the micro-benchmark
  double synthetic_slowdown = 1.0;    // >= 1; emulates a slower machine
  double operand_timeout_s = 30.0;
  std::vector<std::string> services{"matmul"};
};

// Speed on the reference micro-benchmark: a 64x64 pair multiplied eight
// times, median run time, reported as rows per second and discounted by the
// synthetic slowdown.
double calibrate(double synthetic_slowdown = 1.0);

// The service-provider daemon: registers with the coordinator, heartbeats
// its effective speed, executes sub-requests one at a time in arrival order,
// and delivers partial results directly to the requesting client.
class ProviderDaemon {
public:
  ProviderDaemon(ProviderConfig config, Transport& transport);
  ~ProviderDaemon();

  // Calibrates, binds the listener, registers (with reconnect backoff) and
  // spawns the listen/worker/heartbeat duties.
  void start();
  void stop();

  double calibrated_speed() const { return speed_; }
  Endpoint listen_endpoint() const;
  Endpoint advertised_endpoint() const;

private:
  void accept_loop();
  void connection_loop(std::shared_ptr<Channel> ch);
  void worker_loop();
  void heartbeat_loop();
  void execute(std::uint64_t job_id, const SubRequestBody& sub);
  void send_to_coordinator(const Message& m);  // reconnects once per call
  void send_to_client(const Endpoint& client, const Message& m);
  void report_error(std::uint64_t job_id, const Endpoint& client, Errc code, std::string detail);
  void register_with(Channel& ch);

  struct BusyMeter {
    std::mutex mu;
    double accum_s = 0.0;
    bool active = false;
    std::chrono::steady_clock::time_point started;

    void begin();
    void end();
    // Busy fraction of the elapsed window; resets the accumulator.
    double take_fraction(double window_s);
  };

  ProviderConfig cfg_;
  Transport& transport_;
  double speed_ = 0.0;
  std::unique_ptr<Listener> listener_;

  std::mutex coord_mu_;  // heartbeat thread and error paths share this writer
  std::unique_ptr<Channel> coord_;

  std::mutex work_mu_;
  std::condition_variable work_cv_;
  std::deque<std::pair<std::uint64_t, SubRequestBody>> work_;

  std::mutex operands_mu_;
  std::condition_variable operands_cv_;
  std::map<std::uint64_t, Matrix> operands_;

  BusyMeter busy_;

  std::mutex clients_mu_;
  std::map<Endpoint, std::unique_ptr<Channel>> clients_;

  std::atomic<bool> stopping_{false};
  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  std::thread accept_thread_;
  std::thread worker_thread_;
  std::thread heartbeat_thread_;
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Channel>> conns_;
  std::vector<std::thread> conn_threads_;
};

}  // namespace tda
