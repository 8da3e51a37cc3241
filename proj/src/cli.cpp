#include "tda/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>

#include "CLI11.hpp"
#include "tda/client.hpp"
#include "tda/coordinator.hpp"
#include "tda/csv.hpp"
#include "tda/log.hpp"
#include "tda/provider.hpp"
#include "tda/sim.hpp"

namespace tda::cli {
namespace {

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write '" + out_path + "'");
  out << text;
}

int run_coordinator(const std::string& listen, const std::string& config_path,
                    const std::string& snapshot) {
  CoordinatorConfig cfg;
  if (!config_path.empty()) cfg = coordinator_config_from(load_key_values(config_path));
  if (!snapshot.empty()) cfg.snapshot_path = snapshot;
  CoordinatorServer server(cfg, tcp_transport(), parse_endpoint(listen, true));
  server.start();
  std::promise<void>().get_future().wait();  // runs until killed
  return 0;
}

int run_provider(ProviderConfig cfg) {
  ProviderDaemon daemon(std::move(cfg), tcp_transport());
  daemon.start();
  std::promise<void>().get_future().wait();
  return 0;
}

int run_client_submit(const std::string& coordinator, std::uint32_t size,
                      const std::string& policy, std::uint64_t seed,
                      const std::string& reply_host) {
  Matrix a = generate_matrix(size, size, seed);
  Matrix b = generate_matrix(size, size, seed + 1);

  SubmitOptions options;
  options.coordinator = parse_endpoint(coordinator);
  options.policy = parse_policy(policy);
  options.reply_host = reply_host;

  auto result = submit(a, b, options, tcp_transport());

  Matrix expected = multiply_reference(a, b);
  if (!bit_identical(result.product, expected))
    fail(Errc::job_failed, "assembled product differs from the sequential reference");

  std::fputs((result.timing.csv_line() + "\n").c_str(), stdout);
  return 0;
}

int run_status(const std::string& coordinator) {
  auto reply = query_status(tcp_transport(), parse_endpoint(coordinator));
  std::printf("%-16s %-22s %12s %14s %10s  %s\n", "ID", "ENDPOINT", "PERF", "LAST_SEEN_AGE",
              "RTT_MS", "SERVICES");
  for (const auto& p : reply.providers) {
    std::string services;
    for (const auto& s : p.services) services += (services.empty() ? "" : ",") + s;
    std::string age = std::isinf(p.last_seen_age_s) ? "never" : fmt_g9(p.last_seen_age_s) + "s";
    std::string rtt = std::isnan(p.rtt_ms) ? "-" : fmt_g9(p.rtt_ms);
    std::printf("%-16s %-22s %12s %14s %10s  %s\n", p.id.c_str(), to_string(p.endpoint).c_str(),
                fmt_g9(p.performance).c_str(), age.c_str(), rtt.c_str(), services.c_str());
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Homogenizing load balancer: coordinator, providers, client and simulator"};
  app.require_subcommand(1);

  // coordinator
  auto* coord = app.add_subcommand("coordinator", "Run the coordinating server");
  std::string listen = "0.0.0.0:7400";
  std::string config_path;
  std::string snapshot;
  coord->add_option("--listen", listen, "host:port to listen on")->capture_default_str();
  coord->add_option("--config", config_path, "key = value config file");
  coord->add_option("--snapshot", snapshot, "registration snapshot path");

  // provider
  auto* prov = app.add_subcommand("provider", "Run a service-provider daemon");
  ProviderConfig pcfg;
  std::string prov_coord;
  std::string prov_listen = "127.0.0.1:0";
  prov->add_option("--id", pcfg.id, "provider id")->required();
  prov->add_option("--coordinator", prov_coord, "coordinator host:port")->required();
  prov->add_option("--listen", prov_listen, "host:port to listen on")->capture_default_str();
  prov->add_option("--slowdown", pcfg.synthetic_slowdown, "synthetic slowdown factor >= 1")
      ->check(CLI::Range(1.0, 1e9));
  prov->add_option("--calibration", pcfg.calibration_override,
                   "fixed performance value, skips the micro-benchmark")
      ->check(CLI::PositiveNumber);
  prov->add_option("--heartbeat", pcfg.heartbeat_interval_s, "heartbeat interval seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // client submit
  auto* client = app.add_subcommand("client", "Client-side operations");
  client->require_subcommand(1);
  auto* submit_cmd = client->add_subcommand("submit", "Generate seeded matrices and submit");
  std::string client_coord;
  std::uint32_t size = 0;
  std::string policy = "homogenized";
  std::uint64_t seed = 1;
  std::string reply_host = "127.0.0.1";
  submit_cmd->add_option("--coordinator", client_coord, "coordinator host:port")->required();
  submit_cmd->add_option("--size", size, "square matrix size N")
      ->required()
      ->check(CLI::PositiveNumber);
  submit_cmd->add_option("--policy", policy, "homogenized|equal")
      ->check(CLI::IsMember({"homogenized", "equal"}))
      ->capture_default_str();
  submit_cmd->add_option("--seed", seed, "matrix generator seed")->capture_default_str();
  submit_cmd->add_option("--reply-host", reply_host, "host providers reply to")
      ->capture_default_str();

  // sim
  auto* sim = app.add_subcommand("sim", "Deterministic virtual-clock simulator");
  sim->require_subcommand(1);
  std::string scenario_path;
  std::string out_path;
  auto* sim_run = sim->add_subcommand("run", "Simulate each (policy, load) at full cluster size");
  sim_run->add_option("--scenario", scenario_path, "scenario file")->required();
  sim_run->add_option("--out", out_path, "CSV output path (default stdout)");
  auto* sim_sweep =
      sim->add_subcommand("sweep", "Sweep provider-count prefixes for every (policy, load)");
  sim_sweep->add_option("--scenario", scenario_path, "scenario file")->required();
  sim_sweep->add_option("--out", out_path, "CSV output path (default stdout)");
  auto* sim_rep = sim->add_subcommand("replicate-paper", "Sweep the bundled nine-provider cluster");
  sim_rep->add_option("--out", out_path, "CSV output path (default stdout)");

  // status
  auto* status_cmd = app.add_subcommand("status", "Show the coordinator's provider table");
  std::string status_coord;
  status_cmd->add_option("--coordinator", status_coord, "coordinator host:port")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: Usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (coord->parsed()) return run_coordinator(listen, config_path, snapshot);
    if (prov->parsed()) {
      pcfg.coordinator = parse_endpoint(prov_coord);
      pcfg.listen = parse_endpoint(prov_listen, true);
      return run_provider(std::move(pcfg));
    }
    if (submit_cmd->parsed())
      return run_client_submit(client_coord, size, policy, seed, reply_host);
    if (sim_run->parsed()) {
      write_output(outcome_to_csv(simulate(load_scenario(scenario_path))), out_path);
      return 0;
    }
    if (sim_sweep->parsed()) {
      write_output(outcome_to_csv(sweep(load_scenario(scenario_path))), out_path);
      return 0;
    }
    if (sim_rep->parsed()) {
      write_output(outcome_to_csv(sweep(paper_replication_scenario())), out_path);
      return 0;
    }
    if (status_cmd->parsed()) return run_status(status_coord);
  } catch (const Error& e) {
    std::cerr << "error: " << errc_name(e.code()) << ": " << e.detail() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace tda::cli
