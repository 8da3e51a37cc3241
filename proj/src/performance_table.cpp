#include "tda/performance_table.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tda/error.hpp"

namespace tda {

void PerformanceTable::register_provider(const std::string& id, const Endpoint& endpoint,
                                         std::vector<std::string> services) {
  if (id.empty()) fail(Errc::registration_rejected, "provider id must be non-empty");
  if (endpoint.host.empty() || endpoint.port == 0)
    fail(Errc::registration_rejected, "malformed endpoint " + to_string(endpoint));
  auto& entry = entries_[id];
  entry.endpoint = endpoint;
  entry.services = std::set<std::string>(services.begin(), services.end());
}

void PerformanceTable::ingest(const PerformanceSample& sample) {
  auto it = entries_.find(sample.provider_id);
  if (it == entries_.end())
    fail(Errc::unknown_provider, "heartbeat from unregistered '" + sample.provider_id + "'");
  auto& history = it->second.history;

  // Insert keeping timestamp order so the table is a pure fold over events:
  // any arrival interleaving of distinct-timestamp samples produces the same
  // state.
  auto pos = std::upper_bound(
      history.begin(), history.end(), sample,
      [](const PerformanceSample& a, const PerformanceSample& b) {
        return a.reported_at < b.reported_at;
      });
  history.insert(pos, sample);
  while (history.size() > bound_) history.pop_front();
}

const ProviderEntry* PerformanceTable::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

void PerformanceTable::set_rtt(const std::string& id, double ms) {
  auto it = entries_.find(id);
  if (it != entries_.end()) it->second.rtt_ms = ms;
}

PerformanceMap PerformanceTable::eligible(double now, const std::string& kind,
                                          double staleness_window,
                                          const HomogenizeParams& params) const {
  PerformanceMap out;
  for (const auto& [id, entry] : entries_) {
    if (entry.services.count(kind) == 0) continue;
    if (entry.history.empty()) continue;
    if (now - entry.last_seen() > staleness_window) continue;
    std::vector<PerformanceSample> history(entry.history.begin(), entry.history.end());
    double value = homogenize_performance(history, now, params).value;
    if (value <= params.epsilon_floor) continue;
    out[id] = value;
  }
  return out;
}

std::vector<ProviderStatus> PerformanceTable::status(double now,
                                                     const HomogenizeParams& params) const {
  std::vector<ProviderStatus> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) {
    ProviderStatus row;
    row.id = id;
    row.endpoint = entry.endpoint;
    row.services = std::vector<std::string>(entry.services.begin(), entry.services.end());
    row.rtt_ms = entry.rtt_ms;
    if (entry.history.empty()) {
      row.performance = 0.0;
      row.last_seen_age_s = std::numeric_limits<double>::infinity();
    } else {
      std::vector<PerformanceSample> history(entry.history.begin(), entry.history.end());
      row.performance = homogenize_performance(history, now, params).value;
      row.last_seen_age_s = now - entry.last_seen();
    }
    out.push_back(std::move(row));
  }
  return out;
}

void PerformanceTable::save_registrations(const std::string& path) const {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write snapshot '" + tmp + "'");
    for (const auto& [id, entry] : entries_) {
      out << id << '\t' << entry.endpoint.host << '\t' << entry.endpoint.port << '\t';
      bool first = true;
      for (const auto& s : entry.services) {
        if (!first) out << ',';
        out << s;
        first = false;
      }
      out << '\n';
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(Errc::io_error, "cannot rename snapshot into place at '" + path + "'");
}

void PerformanceTable::load_registrations(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, host, port_text, services_text;
    if (!std::getline(row, id, '\t') || !std::getline(row, host, '\t') ||
        !std::getline(row, port_text, '\t'))
      fail(Errc::invalid_config, "corrupt snapshot line: " + line);
    std::getline(row, services_text, '\t');
    std::vector<std::string> services;
    std::istringstream list(services_text);
    std::string s;
    while (std::getline(list, s, ','))
      if (!s.empty()) services.push_back(s);
    register_provider(id, Endpoint{host, static_cast<std::uint16_t>(std::stoi(port_text))},
                      std::move(services));
  }
}

}  // namespace tda
