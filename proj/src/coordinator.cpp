#include "tda/coordinator.hpp"

#include <algorithm>
#include <cmath>

#include "tda/clock.hpp"
#include "tda/csv.hpp"
#include "tda/log.hpp"
#include "tda/workload.hpp"

namespace tda {
namespace {

// Per-row cost of a sub-request relative to the 64x64 calibration kernel;
// providers report rows/s in calibration units.
double row_cost_scale(std::uint64_t inner, std::uint64_t out_cols) {
  return (static_cast<double>(inner) * static_cast<double>(out_cols)) / (64.0 * 64.0);
}

}  // namespace

CoordinatorConfig coordinator_config_from(const KeyValues& kv) {
  CoordinatorConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "heartbeat_interval_s") cfg.heartbeat_interval_s = parse_double(value, key);
    else if (key == "staleness_window_s") cfg.staleness_window_s = parse_double(value, key);
    else if (key == "half_life_s") cfg.half_life_s = parse_double(value, key);
    else if (key == "epsilon_floor") cfg.epsilon_floor = parse_double(value, key);
    else if (key == "history_bound") cfg.history_bound = parse_uint(value, key);
    else if (key == "snapshot_path") cfg.snapshot_path = value;
    else fail(Errc::invalid_config, "unknown coordinator config key '" + key + "'");
  }
  if (cfg.heartbeat_interval_s <= 0.0)
    fail(Errc::invalid_config, "heartbeat_interval_s must be positive");
  return cfg;
}

Coordinator::Coordinator(CoordinatorConfig config, Transport& transport)
    : config_(std::move(config)), transport_(transport), now_(mono_now),
      table_(config_.history_bound) {
  if (!config_.snapshot_path.empty()) {
    std::lock_guard lock(mu_);
    table_.load_registrations(config_.snapshot_path);
    if (table_.size() > 0)
      log_info("snapshot_loaded", 0, {{"providers", std::to_string(table_.size())}});
  }
}

void Coordinator::register_provider(const std::string& id, const Endpoint& endpoint,
                                    std::vector<std::string> services) {
  std::lock_guard lock(mu_);
  bool known = table_.contains(id);
  table_.register_provider(id, endpoint, std::move(services));
  snapshot_locked();
  log_info(known ? "provider_refreshed" : "provider_registered", 0,
           {{"provider", id}, {"endpoint", to_string(endpoint)}});
}

void Coordinator::ingest_heartbeat(const std::string& provider_id, const HeartbeatBody& hb) {
  PerformanceSample sample{provider_id, now_(), hb.raw_speed, hb.load_factor};
  std::lock_guard lock(mu_);
  try {
    table_.ingest(sample);
  } catch (const Error& e) {
    log_info("heartbeat_dropped", 0, {{"provider", provider_id}, {"reason", e.detail()}});
  }
}

namespace {

ScopePlan make_plan(Policy policy, std::uint64_t total, const PerformanceMap& eligible) {
  if (policy == Policy::Homogenized) return compute_scope_lengths(total, eligible);
  std::vector<std::string> ids;
  ids.reserve(eligible.size());
  for (const auto& [id, _] : eligible) ids.push_back(id);
  return equal_scope_lengths(total, ids);
}

}  // namespace

JobRecord Coordinator::plan_job(std::uint64_t job_id, const JobRequestBody& request) {
  double now = now_();
  PerformanceMap eligible;
  {
    std::lock_guard lock(mu_);
    eligible = table_.eligible(now, request.workload_kind, config_.staleness(),
                               config_.homogenize_params());
  }
  if (eligible.empty())
    fail(Errc::no_providers, "no fresh provider offers '" + request.workload_kind + "'");

  std::uint64_t total = work_units(request.first);
  return JobRecord{job_id, request.reply_to, request.workload_kind,
                   total,  make_plan(request.policy, total, eligible),
                   now,    request.policy};
}

Coordinator::ProviderLink* Coordinator::link_for(const std::string& id, const Endpoint& endpoint) {
  {
    std::lock_guard lock(links_mu_);
    auto it = links_.find(id);
    if (it != links_.end() && it->second->channel) return it->second.get();
  }
  try {
    auto t0 = std::chrono::steady_clock::now();
    auto ch = transport_.connect(endpoint);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    {
      std::lock_guard lock(mu_);
      table_.set_rtt(id, ms);
    }
    std::lock_guard lock(links_mu_);
    auto& link = links_[id];
    if (!link) link = std::make_unique<ProviderLink>();
    link->channel = std::move(ch);
    return link.get();
  } catch (const Error& e) {
    log_info("provider_unreachable", 0, {{"provider", id}, {"reason", e.detail()}});
    return nullptr;
  }
}

void Coordinator::drop_link(const std::string& id) {
  std::lock_guard lock(links_mu_);
  links_.erase(id);
}

void Coordinator::handle_job_request(std::uint64_t job_id, const JobRequestBody& request,
                                     Channel& client) {
  double now = now_();
  PerformanceMap eligible;
  std::map<std::string, Endpoint> endpoints;
  {
    std::lock_guard lock(mu_);
    eligible = table_.eligible(now, request.workload_kind, config_.staleness(),
                               config_.homogenize_params());
    for (const auto& [id, _] : eligible) endpoints[id] = table_.find(id)->endpoint;
  }
  if (eligible.empty()) {
    log_info("job_rejected", job_id, {{"reason", "no eligible providers"}});
    client.send(make_error(job_id, "coordinator", Errc::no_providers,
                           "no fresh provider offers '" + request.workload_kind + "'"));
    return;
  }

  JobRecord record{job_id,
                   request.reply_to,
                   request.workload_kind,
                   work_units(request.first),
                   make_plan(request.policy, work_units(request.first), eligible),
                   now,
                   request.policy};

  // Verify every participating provider is reachable before any sub-request
  // goes out, so a replan never strands a provider with a chunk from the
  // abandoned plan. One replan over the survivors, then give up.
  for (int round = 0;; ++round) {
    std::vector<std::string> unreachable;
    for (const auto& a : record.plan.allotments) {
      if (a.rows == 0) continue;
      if (link_for(a.provider_id, endpoints.at(a.provider_id)) == nullptr)
        unreachable.push_back(a.provider_id);
    }
    if (unreachable.empty()) break;
    for (const auto& id : unreachable) eligible.erase(id);
    if (round >= 1 || eligible.empty()) {
      log_info("job_failed", job_id, {{"reason", "providers unreachable at dispatch"}});
      client.send(make_error(job_id, "coordinator", Errc::job_failed,
                             "providers unreachable at dispatch"));
      return;
    }
    log_info("job_replanned", job_id,
             {{"excluded", std::to_string(unreachable.size()) + " providers"}});
    record.plan = make_plan(request.policy, record.total_load, eligible);
  }

  auto chunks = split_rows(request.first, record.plan);
  double scale = row_cost_scale(request.first.cols, request.operand_cols);
  double p_total = 0.0;
  double predicted_finish = 0.0;
  JobAcceptedBody accepted;
  accepted.policy = record.policy;

  for (const auto& chunk : chunks) {
    if (chunk.range.length() == 0) continue;
    double perf = eligible.at(chunk.provider_id);
    p_total += perf;
    predicted_finish =
        std::max(predicted_finish, static_cast<double>(chunk.range.length()) * scale / perf);
    accepted.shares.push_back({chunk.provider_id, endpoints.at(chunk.provider_id), chunk.range});
  }
  accepted.p_total = p_total;
  accepted.predicted_finish_s = predicted_finish;

  for (const auto& chunk : chunks) {
    if (chunk.range.length() == 0) continue;
    SubRequestBody sub;
    sub.workload_kind = record.workload_kind;
    sub.client = record.client_endpoint;
    sub.total_rows = record.total_load;
    sub.range = chunk.range;
    sub.block = chunk.block;

    Message m;
    m.kind = MsgKind::SubRequest;
    m.job_id = job_id;
    m.sender_id = "coordinator";
    m.body = std::move(sub);

    ProviderLink* link = nullptr;
    {
      std::lock_guard lock(links_mu_);
      auto it = links_.find(chunk.provider_id);
      if (it != links_.end()) link = it->second.get();
    }
    try {
      if (link == nullptr) fail(Errc::channel_closed, "dispatch channel gone");
      std::lock_guard lock(link->mu);
      link->channel->send(m);
    } catch (const Error& e) {
      drop_link(chunk.provider_id);
      log_info("job_failed", job_id,
               {{"provider", chunk.provider_id}, {"reason", e.detail()}});
      client.send(make_error(job_id, "coordinator", Errc::job_failed,
                             "send to '" + chunk.provider_id + "' failed: " + e.detail()));
      return;
    }
    log_debug("sub_request_sent", job_id,
              {{"provider", chunk.provider_id},
               {"rows", std::to_string(chunk.range.begin) + ".." + std::to_string(chunk.range.end)}});
  }

  {
    std::lock_guard lock(mu_);
    jobs_[job_id] = record;
  }

  Message reply;
  reply.kind = MsgKind::JobAccepted;
  reply.job_id = job_id;
  reply.sender_id = "coordinator";
  reply.body = std::move(accepted);
  client.send(reply);
  log_info("job_dispatched", job_id,
           {{"policy", to_string(record.policy)},
            {"rows", std::to_string(record.total_load)},
            {"providers", std::to_string(record.plan.allotments.size())}});
}

StatusReplyBody Coordinator::status() const {
  std::lock_guard lock(mu_);
  return StatusReplyBody{table_.status(now_(), config_.homogenize_params())};
}

std::size_t Coordinator::provider_count() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

std::optional<JobRecord> Coordinator::job(std::uint64_t job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void Coordinator::snapshot_locked() {
  if (config_.snapshot_path.empty()) return;
  try {
    table_.save_registrations(config_.snapshot_path);
  } catch (const Error& e) {
    log_error("snapshot_failed", 0, {{"reason", e.detail()}});
  }
}

void Coordinator::serve_connection(Channel& ch) {
  try {
    while (auto msg = ch.receive()) {
      switch (msg->kind) {
        case MsgKind::Register: {
          const auto& body = std::get<RegisterBody>(msg->body);
          try {
            register_provider(msg->sender_id, body.listen, body.services);
            Message ack;
            ack.kind = MsgKind::RegisterAck;
            ack.sender_id = "coordinator";
            ch.send(ack);
          } catch (const Error& e) {
            ch.send(make_error(0, "coordinator", e.code(), e.detail()));
          }
          break;
        }
        case MsgKind::Heartbeat:
          ingest_heartbeat(msg->sender_id, std::get<HeartbeatBody>(msg->body));
          break;
        case MsgKind::JobRequest:
          handle_job_request(msg->job_id, std::get<JobRequestBody>(msg->body), ch);
          break;
        case MsgKind::StatusRequest: {
          Message reply;
          reply.kind = MsgKind::StatusReply;
          reply.sender_id = "coordinator";
          reply.body = status();
          ch.send(reply);
          break;
        }
        case MsgKind::ErrorReport: {
          const auto& body = std::get<ErrorBody>(msg->body);
          log_info("provider_error", msg->job_id,
                   {{"from", msg->sender_id}, {"code", body.code}, {"detail", body.detail}});
          break;
        }
        default:
          log_info("unexpected_message", msg->job_id, {{"kind", to_string(msg->kind)}});
          break;
      }
    }
  } catch (const Error& e) {
    log_debug("connection_ended", 0, {{"reason", e.detail()}});
  }
}

CoordinatorServer::CoordinatorServer(CoordinatorConfig config, Transport& transport,
                                     const Endpoint& listen)
    : core_(std::move(config), transport), listener_(transport.listen(listen)) {}

CoordinatorServer::~CoordinatorServer() { stop(); }

void CoordinatorServer::start() {
  accept_thread_ = std::thread([this] {
    while (auto ch = listener_->accept()) {
      std::shared_ptr<Channel> shared = std::move(ch);
      std::lock_guard lock(conns_mu_);
      if (stopping_.load()) {
        shared->close();
        break;
      }
      conns_.push_back(shared);
      conn_threads_.emplace_back([this, shared] { core_.serve_connection(*shared); });
    }
  });
  log_info("coordinator_listening", 0, {{"endpoint", to_string(endpoint())}});
}

void CoordinatorServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_->close();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::shared_ptr<Channel>> conns;
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
    threads.swap(conn_threads_);
  }
  for (auto& c : conns) c->close();
  for (auto& t : threads)
    if (t.joinable()) t.join();
}

}  // namespace tda
