#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tda/endpoint.hpp"
#include "tda/message.hpp"
#include "tda/scheduler.hpp"

namespace tda {

struct ProviderEntry {
  Endpoint endpoint;
  std::set<std::string> services;
  std::deque<PerformanceSample> history;  // sorted by reported_at, bounded
  double rtt_ms = std::numeric_limits<double>::quiet_NaN();

  // Newest sample's timestamp; -inf before the first heartbeat.
  double last_seen() const {
    return history.empty() ? -std::numeric_limits<double>::infinity()
                           : history.back().reported_at;
  }
};

// The coordinator's knowledge base: who exists, where they listen, what they
// offer and how fast they have recently been. Not thread-safe on its own;
// the coordinator serializes access.
class PerformanceTable {
public:
  explicit PerformanceTable(std::size_t history_bound = 64) : bound_(history_bound) {}

  // Creates or refreshes an entry. Re-registration updates the endpoint and
  // services but keeps the sample history.
  void register_provider(const std::string& id, const Endpoint& endpoint,
                         std::vector<std::string> services);

  // Appends a sample in timestamp order, evicting the oldest past the bound.
  // Unknown providers are an error (callers drop and log).
  void ingest(const PerformanceSample& sample);

  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const ProviderEntry* find(const std::string& id) const;
  std::size_t size() const { return entries_.size(); }
  void set_rtt(const std::string& id, double ms);

  // Homogenized performance per provider that offers `kind`, has heartbeat
  // history newer than the staleness window, and clears the epsilon floor.
  PerformanceMap eligible(double now, const std::string& kind, double staleness_window,
                          const HomogenizeParams& params) const;

  std::vector<ProviderStatus> status(double now, const HomogenizeParams& params) const;

  // Registrations only (histories are runtime state). Written to a temp file
  // and renamed so a crash never leaves a torn snapshot.
  void save_registrations(const std::string& path) const;
  void load_registrations(const std::string& path);  // missing file is fine

private:
  std::size_t bound_;
  std::map<std::string, ProviderEntry> entries_;
};

}  // namespace tda
