#include "tda/provider.hpp"

#include <algorithm>
#include <array>
#include <chrono>

#include "tda/log.hpp"
#include "tda/matrix.hpp"
#include "tda/workload.hpp"

namespace tda {
namespace {

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

constexpr std::uint64_t kCalibrationSeedA = 0xCA11B7A7E5EED001ULL;
constexpr std::uint64_t kCalibrationSeedB = 0xCA11B7A7E5EED002ULL;

}  // namespace

double calibrate(double synthetic_slowdown) {
  if (synthetic_slowdown < 1.0)
    fail(Errc::invalid_argument, "synthetic_slowdown must be >= 1");
  Matrix a = generate_matrix(64, 64, kCalibrationSeedA);
  Matrix b = generate_matrix(64, 64, kCalibrationSeedB);

  std::array<double, 8> runs{};
  for (auto& r : runs) {
    auto t0 = steady::now();
    Matrix c = multiply_reference(a, b);
    r = seconds_since(t0);
    // keep the optimizer honest
    if (c.data[0] < 0.0) fail(Errc::invalid_argument, "impossible");
  }
  std::sort(runs.begin(), runs.end());
  double median = 0.5 * (runs[3] + runs[4]);
  double total_median_normalized = 8.0 * median;
  return (64.0 * 8.0) / total_median_normalized / synthetic_slowdown;
}

void ProviderDaemon::BusyMeter::begin() {
  std::lock_guard lock(mu);
  active = true;
  started = steady::now();
}

void ProviderDaemon::BusyMeter::end() {
  std::lock_guard lock(mu);
  accum_s += seconds_since(started);
  active = false;
}

double ProviderDaemon::BusyMeter::take_fraction(double window_s) {
  std::lock_guard lock(mu);
  double busy = accum_s;
  if (active) {
    busy += seconds_since(started);
    started = steady::now();
  }
  accum_s = 0.0;
  if (window_s <= 0.0) return 0.0;
  return std::clamp(busy / window_s, 0.0, 1.0);
}

ProviderDaemon::ProviderDaemon(ProviderConfig config, Transport& transport)
    : cfg_(std::move(config)), transport_(transport) {
  if (cfg_.id.empty()) fail(Errc::invalid_argument, "provider id must be non-empty");
  if (cfg_.heartbeat_interval_s <= 0.0)
    fail(Errc::invalid_argument, "heartbeat interval must be positive");
  if (cfg_.synthetic_slowdown < 1.0)
    fail(Errc::invalid_argument, "synthetic_slowdown must be >= 1");
}

ProviderDaemon::~ProviderDaemon() { stop(); }

Endpoint ProviderDaemon::listen_endpoint() const { return listener_->local_endpoint(); }

Endpoint ProviderDaemon::advertised_endpoint() const {
  // Keep the operator-supplied host (the listener may resolve to a wildcard
  // address) but take the real port, which matters for ephemeral binds.
  Endpoint ep = cfg_.listen;
  ep.port = listener_->local_endpoint().port;
  if (ep.host.empty()) ep.host = listener_->local_endpoint().host;
  return ep;
}

void ProviderDaemon::register_with(Channel& ch) {
  Message reg;
  reg.kind = MsgKind::Register;
  reg.sender_id = cfg_.id;
  reg.body = RegisterBody{advertised_endpoint(), cfg_.services};
  ch.send(reg);
  auto reply = ch.receive();
  if (!reply) fail(Errc::channel_closed, "coordinator closed during registration");
  if (reply->kind == MsgKind::ErrorReport) {
    const auto& body = std::get<ErrorBody>(reply->body);
    fail(Errc::registration_rejected, body.code + ": " + body.detail);
  }
  if (reply->kind != MsgKind::RegisterAck)
    fail(Errc::registration_rejected, "unexpected reply kind");
}

void ProviderDaemon::start() {
  speed_ = cfg_.calibration_override > 0.0 ? cfg_.calibration_override
                                           : calibrate(cfg_.synthetic_slowdown);
  listener_ = transport_.listen(cfg_.listen);

  {
    std::lock_guard lock(coord_mu_);
    coord_ = connect_with_backoff(transport_, cfg_.coordinator);
    register_with(*coord_);
    Message hb;
    hb.kind = MsgKind::Heartbeat;
    hb.sender_id = cfg_.id;
    hb.body = HeartbeatBody{speed_, 0.0};
    coord_->send(hb);
  }
  log_info("provider_started", 0,
           {{"provider", cfg_.id},
            {"endpoint", to_string(advertised_endpoint())},
            {"speed", std::to_string(speed_)}});

  accept_thread_ = std::thread([this] { accept_loop(); });
  worker_thread_ = std::thread([this] { worker_loop(); });
  heartbeat_thread_ = std::thread([this] { heartbeat_loop(); });
}

void ProviderDaemon::stop() {
  if (stopping_.exchange(true)) return;
  if (listener_) listener_->close();
  work_cv_.notify_all();
  operands_cv_.notify_all();
  stop_cv_.notify_all();
  std::vector<std::shared_ptr<Channel>> conns;
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
    threads.swap(conn_threads_);
  }
  for (auto& c : conns) c->close();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (worker_thread_.joinable()) worker_thread_.join();
  if (heartbeat_thread_.joinable()) heartbeat_thread_.join();
  for (auto& t : threads)
    if (t.joinable()) t.join();
  {
    std::lock_guard lock(coord_mu_);
    if (coord_) coord_->close();
  }
  std::lock_guard lock(clients_mu_);
  for (auto& [_, ch] : clients_) ch->close();
}

void ProviderDaemon::accept_loop() {
  while (auto ch = listener_->accept()) {
    std::shared_ptr<Channel> shared = std::move(ch);
    std::lock_guard lock(conns_mu_);
    if (stopping_.load()) {
      shared->close();
      break;
    }
    conns_.push_back(shared);
    conn_threads_.emplace_back([this, shared] { connection_loop(shared); });
  }
}

void ProviderDaemon::connection_loop(std::shared_ptr<Channel> ch) {
  try {
    while (auto msg = ch->receive()) {
      if (msg->kind == MsgKind::SubRequest) {
        {
          std::lock_guard lock(work_mu_);
          work_.emplace_back(msg->job_id, std::get<SubRequestBody>(msg->body));
        }
        work_cv_.notify_one();
      } else if (msg->kind == MsgKind::BroadcastOperand) {
        {
          std::lock_guard lock(operands_mu_);
          operands_[msg->job_id] = std::move(std::get<BroadcastOperandBody>(msg->body).operand);
        }
        operands_cv_.notify_all();
      } else {
        log_debug("unexpected_message", msg->job_id, {{"kind", to_string(msg->kind)}});
      }
    }
  } catch (const Error& e) {
    log_debug("connection_ended", 0, {{"reason", e.detail()}});
  }
}

void ProviderDaemon::worker_loop() {
  for (;;) {
    std::pair<std::uint64_t, SubRequestBody> item;
    {
      std::unique_lock lock(work_mu_);
      work_cv_.wait(lock, [&] { return stopping_.load() || !work_.empty(); });
      if (stopping_.load()) return;
      item = std::move(work_.front());
      work_.pop_front();
    }
    try {
      execute(item.first, item.second);
    } catch (const Error& e) {
      log_error("sub_request_failed", item.first, {{"reason", e.detail()}});
    }
  }
}

void ProviderDaemon::execute(std::uint64_t job_id, const SubRequestBody& sub) {
  if (sub.range.length() == 0) return;  // vacuous work
  if (sub.range.end > sub.total_rows || sub.range.begin > sub.range.end) {
    report_error(job_id, sub.client, Errc::plan_mismatch,
                 "row range exceeds first-operand bounds");
    return;
  }
  if (sub.block.rows != sub.range.length()) {
    report_error(job_id, sub.client, Errc::plan_mismatch, "block height differs from row range");
    return;
  }
  const DivisibleWorkload* workload = nullptr;
  try {
    workload = &workload_for(sub.workload_kind);
  } catch (const Error& e) {
    report_error(job_id, sub.client, e.code(), e.detail());
    return;
  }

  Matrix operand;
  {
    std::unique_lock lock(operands_mu_);
    auto deadline =
        steady::now() + std::chrono::duration_cast<steady::duration>(
                            std::chrono::duration<double>(cfg_.operand_timeout_s));
    bool ok = operands_cv_.wait_until(lock, deadline, [&] {
      return stopping_.load() || operands_.count(job_id) != 0;
    });
    if (stopping_.load()) return;
    if (!ok || operands_.count(job_id) == 0) {
      lock.unlock();
      // Timeout goes to both parties: the client is waiting on the result,
      // the coordinator dispatched the work.
      report_error(job_id, sub.client, Errc::operand_timeout,
                   "second operand never arrived");
      return;
    }
    operand = operands_[job_id];
    operands_.erase(job_id);
  }

  if (sub.block.cols != operand.rows) {
    report_error(job_id, sub.client, Errc::dimension_mismatch,
                 "operand shape does not conform to row block");
    return;
  }

  busy_.begin();
  auto t0 = steady::now();
  Matrix result = workload->compute(sub.block, operand);
  double raw_s = seconds_since(t0);
  // Busy-wait padding makes a synthetic slowdown of s cost at least s times
  // the un-slowed compute time, so staged heterogeneity is reproducible.
  double target_s = raw_s * cfg_.synthetic_slowdown;
  while (seconds_since(t0) < target_s) {
  }
  double compute_s = seconds_since(t0);
  busy_.end();

  PartialResultBody body;
  body.range = sub.range;
  body.compute_seconds = compute_s;
  body.block = std::move(result);

  Message m;
  m.kind = MsgKind::PartialResult;
  m.job_id = job_id;
  m.sender_id = cfg_.id;
  m.body = std::move(body);
  try {
    send_to_client(sub.client, m);
    log_debug("partial_result_sent", job_id,
              {{"rows", std::to_string(sub.range.begin) + ".." + std::to_string(sub.range.end)}});
  } catch (const Error& e) {
    log_error("partial_result_undeliverable", job_id, {{"reason", e.detail()}});
  }
}

void ProviderDaemon::send_to_client(const Endpoint& client, const Message& m) {
  std::lock_guard lock(clients_mu_);
  auto it = clients_.find(client);
  if (it == clients_.end())
    it = clients_.emplace(client, transport_.connect(client)).first;
  try {
    it->second->send(m);
  } catch (const Error&) {
    clients_.erase(it);
    clients_.emplace(client, transport_.connect(client)).first->second->send(m);
  }
}

void ProviderDaemon::send_to_coordinator(const Message& m) {
  std::lock_guard lock(coord_mu_);
  if (!coord_) {
    coord_ = transport_.connect(cfg_.coordinator);
    register_with(*coord_);
  }
  try {
    coord_->send(m);
  } catch (const Error&) {
    coord_.reset();
    throw;
  }
}

void ProviderDaemon::report_error(std::uint64_t job_id, const Endpoint& client, Errc code,
                                  std::string detail) {
  log_error("sub_request_error", job_id, {{"code", errc_name(code)}, {"detail", detail}});
  Message m = make_error(job_id, cfg_.id, code, detail);
  try {
    send_to_client(client, m);
  } catch (const Error& e) {
    log_error("error_undeliverable", job_id, {{"to", "client"}, {"reason", e.detail()}});
  }
  try {
    send_to_coordinator(m);
  } catch (const Error& e) {
    log_error("error_undeliverable", job_id, {{"to", "coordinator"}, {"reason", e.detail()}});
  }
}

void ProviderDaemon::heartbeat_loop() {
  auto last = steady::now();
  while (!stopping_.load()) {
    {
      std::unique_lock lock(stop_mu_);
      stop_cv_.wait_for(lock, std::chrono::duration<double>(cfg_.heartbeat_interval_s),
                        [&] { return stopping_.load(); });
    }
    if (stopping_.load()) return;
    double window = seconds_since(last);
    last = steady::now();
    double load = busy_.take_fraction(window);

    Message hb;
    hb.kind = MsgKind::Heartbeat;
    hb.sender_id = cfg_.id;
    hb.body = HeartbeatBody{speed_, load};
    try {
      send_to_coordinator(hb);
    } catch (const Error& e) {
      // Skipped this interval; the next one retries from scratch.
      log_info("heartbeat_skipped", 0, {{"reason", e.detail()}});
    }
  }
}

}  // namespace tda
