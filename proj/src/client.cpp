#include "tda/client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "tda/csv.hpp"
#include "tda/log.hpp"
#include "tda/provider.hpp"

namespace tda {
namespace {

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

Errc errc_from_wire(const std::string& code) {
  if (code == "NoProviders") return Errc::no_providers;
  if (code == "OperandTimeout") return Errc::operand_timeout;
  return Errc::job_failed;
}

}  // namespace

AssemblyBuffer::AssemblyBuffer(std::vector<RowRange> expected, std::uint32_t cols)
    : expected_(std::move(expected)), cols_(cols) {
  std::sort(expected_.begin(), expected_.end(),
            [](const RowRange& a, const RowRange& b) { return a.begin < b.begin; });
  std::uint64_t cursor = 0;
  for (const auto& r : expected_) {
    if (r.begin < cursor || r.end < r.begin)
      fail(Errc::plan_mismatch, "expected ranges overlap or are malformed");
    cursor = r.end;
  }
}

void AssemblyBuffer::insert(const RowRange& range, Matrix block) {
  auto it = std::find(expected_.begin(), expected_.end(), range);
  if (it == expected_.end())
    fail(Errc::duplicate_range, "range [" + std::to_string(range.begin) + ", " +
                                    std::to_string(range.end) +
                                    ") is not an outstanding expected range");
  if (blocks_.count(range.begin))
    fail(Errc::duplicate_range, "range [" + std::to_string(range.begin) + ", " +
                                    std::to_string(range.end) + ") already received");
  if (block.rows != range.length() || block.cols != cols_)
    fail(Errc::plan_mismatch, "block shape does not match its range");
  blocks_.emplace(range.begin, std::move(block));
}

Matrix AssemblyBuffer::assemble() const {
  if (!complete()) fail(Errc::incomplete, "partial results still outstanding");
  std::uint64_t rows = 0;
  for (const auto& r : expected_) rows += r.length();
  Matrix out(static_cast<std::uint32_t>(rows), cols_);
  for (const auto& [begin, block] : blocks_)
    std::copy(block.data.begin(), block.data.end(),
              out.data.begin() + static_cast<std::size_t>(begin) * cols_);
  return out;
}

std::string TimingReport::csv_header() {
  return "run_id,policy,load_rows,n_providers,n_h,t_standalone_s,t_total_s,t_compute_max_s,"
         "t_overhead_s,speedup_measured,speedup_formula";
}

std::string TimingReport::csv_line() const {
  std::string line;
  line += std::to_string(job_id);
  line += ",";
  line += to_string(policy);
  line += "," + std::to_string(load_rows);
  line += "," + std::to_string(n_providers);
  line += "," + fmt_g9(n_h());
  line += "," + fmt_g9(t_standalone_s);
  line += "," + fmt_g9(t_total_s);
  line += "," + fmt_g9(t_compute_max_s);
  line += "," + fmt_g9(t_overhead_s);
  line += "," + fmt_g9(speedup_measured());
  line += "," + fmt_g9(n_h());
  return line;
}

SubmitResult submit(const Matrix& a, const Matrix& b, const SubmitOptions& options,
                    Transport& transport) {
  if (a.cols != b.rows)
    fail(Errc::dimension_mismatch, "first operand is " + std::to_string(a.rows) + "x" +
                                       std::to_string(a.cols) + " but second is " +
                                       std::to_string(b.rows) + "x" + std::to_string(b.cols));

  TimingReport report;
  report.policy = options.policy;
  report.load_rows = a.rows;
  report.p_standalone = options.p_standalone > 0.0 ? options.p_standalone : calibrate(1.0);
  report.t_standalone_s = std::numeric_limits<double>::quiet_NaN();

  if (options.measure_standalone) {
    auto t0 = steady::now();
    Matrix reference = multiply_reference(a, b);
    report.t_standalone_s = seconds_since(t0);
    (void)reference;
  }

  std::uint64_t job_id = options.job_id;
  if (job_id == 0) {
    job_id = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(steady::now().time_since_epoch())
            .count());
    if (job_id == 0) job_id = 1;
  }
  report.job_id = job_id;

  // The reply listener exists before the request goes out, so providers can
  // never race the client's readiness.
  auto listener = transport.listen(Endpoint{options.reply_host, 0});
  Endpoint reply_to = listener->local_endpoint();
  if (!options.reply_host.empty()) reply_to.host = options.reply_host;

  struct Arrivals {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Message> items;
    void push(Message m) {
      {
        std::lock_guard lock(mu);
        items.push_back(std::move(m));
      }
      cv.notify_all();
    }
  } arrivals;

  std::mutex conns_mu;
  std::vector<std::shared_ptr<Channel>> conns;
  std::vector<std::thread> readers;
  std::thread acceptor([&] {
    while (auto ch = listener->accept()) {
      std::shared_ptr<Channel> shared = std::move(ch);
      std::lock_guard lock(conns_mu);
      conns.push_back(shared);
      readers.emplace_back([&arrivals, shared] {
        try {
          while (auto msg = shared->receive()) arrivals.push(std::move(*msg));
        } catch (const Error&) {
        }
      });
    }
  });

  auto finish_listener = [&] {
    listener->close();
    if (acceptor.joinable()) acceptor.join();
    std::vector<std::shared_ptr<Channel>> cs;
    std::vector<std::thread> rs;
    {
      std::lock_guard lock(conns_mu);
      cs.swap(conns);
      rs.swap(readers);
    }
    for (auto& c : cs) c->close();
    for (auto& r : rs)
      if (r.joinable()) r.join();
  };

  try {
    auto t0 = steady::now();

    JobRequestBody request;
    request.policy = options.policy;
    request.workload_kind = "matmul";
    request.reply_to = reply_to;
    request.operand_cols = b.cols;
    request.first = a;

    Message msg;
    msg.kind = MsgKind::JobRequest;
    msg.job_id = job_id;
    msg.sender_id = options.client_id;
    msg.body = std::move(request);

    auto coordinator = transport.connect(options.coordinator);
    coordinator->send(msg);
    auto reply = coordinator->receive();
    if (!reply) fail(Errc::channel_closed, "coordinator closed before answering");
    if (reply->kind == MsgKind::ErrorReport) {
      const auto& e = std::get<ErrorBody>(reply->body);
      fail(errc_from_wire(e.code), e.code + ": " + e.detail);
    }
    if (reply->kind != MsgKind::JobAccepted)
      fail(Errc::job_failed, "unexpected coordinator reply");
    const auto& accepted = std::get<JobAcceptedBody>(reply->body);
    if (accepted.shares.empty()) fail(Errc::job_failed, "coordinator accepted with no shares");

    report.p_total = accepted.p_total;
    report.n_providers = accepted.shares.size();
    std::vector<RowRange> expected;
    for (const auto& s : accepted.shares) {
      expected.push_back(s.range);
      report.plan.allotments.push_back({s.provider_id, s.range.length()});
      report.plan.total_load += s.range.length();
    }
    AssemblyBuffer buffer(expected, b.cols);

    // Each provider gets its own copy of the second operand straight from
    // the client; that direct edge is what makes the relationship
    // triangular.
    for (const auto& s : accepted.shares) {
      Message operand;
      operand.kind = MsgKind::BroadcastOperand;
      operand.job_id = job_id;
      operand.sender_id = options.client_id;
      operand.body = BroadcastOperandBody{b};
      try {
        auto ch = transport.connect(s.endpoint);
        ch->send(operand);
        ch->close();
      } catch (const Error& e) {
        fail(Errc::job_failed,
             "operand broadcast to '" + s.provider_id + "' failed: " + e.detail());
      }
    }

    double deadline_s = 10.0 * accepted.predicted_finish_s + options.extra_deadline_s;
    auto deadline = t0 + std::chrono::duration_cast<steady::duration>(
                             std::chrono::duration<double>(deadline_s));

    std::map<std::uint64_t, std::string> range_owner;
    for (const auto& s : accepted.shares) range_owner[s.range.begin] = s.provider_id;

    while (!buffer.complete()) {
      Message m;
      {
        std::unique_lock lock(arrivals.mu);
        if (!arrivals.cv.wait_until(lock, deadline, [&] { return !arrivals.items.empty(); }))
          fail(Errc::assembly_timeout,
               std::to_string(buffer.received()) + "/" + std::to_string(expected.size()) +
                   " ranges arrived before the deadline");
        m = std::move(arrivals.items.front());
        arrivals.items.pop_front();
      }
      if (m.job_id != job_id) continue;
      if (m.kind == MsgKind::ErrorReport) {
        const auto& e = std::get<ErrorBody>(m.body);
        fail(errc_from_wire(e.code), "provider '" + m.sender_id + "': " + e.code + ": " + e.detail);
      }
      if (m.kind != MsgKind::PartialResult) continue;
      auto& part = std::get<PartialResultBody>(m.body);
      buffer.insert(part.range, std::move(part.block));

      ProviderTiming timing;
      auto owner = range_owner.find(part.range.begin);
      timing.provider_id = owner == range_owner.end() ? m.sender_id : owner->second;
      timing.rows = part.range.length();
      timing.received_at_s = seconds_since(t0);
      timing.compute_seconds = part.compute_seconds;
      report.provider_times.push_back(timing);
    }

    Matrix product = buffer.assemble();
    report.t_total_s = seconds_since(t0);
    report.t_compute_max_s = 0.0;
    for (const auto& pt : report.provider_times)
      report.t_compute_max_s = std::max(report.t_compute_max_s, pt.compute_seconds);
    report.t_overhead_s = report.t_total_s - report.t_compute_max_s;

    coordinator->close();
    finish_listener();
    return SubmitResult{std::move(product), std::move(report)};
  } catch (...) {
    finish_listener();
    throw;
  }
}

StatusReplyBody query_status(Transport& transport, const Endpoint& coordinator) {
  auto ch = transport.connect(coordinator);
  Message m;
  m.kind = MsgKind::StatusRequest;
  m.sender_id = "status";
  m.body = StatusRequestBody{};
  ch->send(m);
  auto reply = ch->receive();
  ch->close();
  if (!reply || reply->kind != MsgKind::StatusReply)
    fail(Errc::io_error, "no status reply from coordinator");
  return std::get<StatusReplyBody>(reply->body);
}

}  // namespace tda
