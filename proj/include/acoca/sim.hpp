#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "acoca/agents.hpp"
#include "acoca/cache_engine.hpp"
#include "acoca/economics.hpp"
#include "acoca/event_log.hpp"
#include "acoca/eviction.hpp"
#include "acoca/stats.hpp"
#include "acoca/workload.hpp"

namespace acoca {

struct SimConfig {
  Scenario scenario;
  AgentConfig agent;
  EvictionConfig eviction;
  CacheConfig cache;
  WindowConfig windows;
  std::uint64_t seed = 42;
  int recurrences = 1;
  bool share_parameters = true;
  bool share_epsilon = true;
  Seconds cache_seek_seconds = 0.005;
  double spike_factor = 2.0;
  std::size_t ret_list_cap = 10;
  bool record_item_stats = false;

  void validate() const;  // throws ConfigError
};

enum class EventKind : int {
  RetrievalComplete = 0,
  CLExpiry = 1,
  RewardDue = 2,
  DTExpiry = 3,
  RetListFull = 4,
  QueryArrival = 5,
  WindowRoll = 6,
};

const char* to_string(EventKind k);

struct SimEvent {
  Seconds time = 0;
  EventKind kind = EventKind::QueryArrival;
  std::uint64_t seq = 0;
  Id item;                    // attribute or provider
  std::uint64_t ref = 0;      // query index, token, decision or retrieval id

  // Earlier time first, then kind priority, then insertion order.
  bool operator>(const SimEvent& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    return seq > o.seq;
  }
};

struct RecurrenceCounters {
  std::uint64_t decisions = 0;
  std::uint64_t cache_decisions = 0;
  std::uint64_t explored = 0;
  std::uint64_t rewards = 0;
  std::uint64_t learning_steps = 0;
  std::uint64_t admissions = 0;
  std::uint64_t failed_admissions = 0;
  std::uint64_t entity_evictions = 0;
  std::uint64_t attribute_evictions = 0;
  std::uint64_t premature_evictions = 0;
  std::uint64_t cl_extensions = 0;
  std::uint64_t retrievals = 0;
  std::uint64_t coalesced = 0;
  std::uint64_t ghost_hits = 0;
  std::uint64_t spike_bypasses = 0;
  Money retrieval_ledger;  // sum of Cost_ret over provider retrieval events
  double epsilon_end = 0;
  double delta_end = 1;
  bool capacity_respected = true;
  Seconds min_response_time = kInfinite;
};

struct RecurrenceReport {
  int index = 0;
  std::vector<WindowMetrics> windows;
  std::vector<AccessOutcome> outcomes;
  TotalReturn totals;
  RecurrenceCounters counters;
};

struct RunReport {
  std::vector<RecurrenceReport> recurrences;
  TotalReturn totals;
  EventLog log;
  std::string summary_json;
  std::vector<ItemWindowRow> item_rows;  // when record_item_stats
  std::vector<double> decision_seconds;  // wall time per window, non-deterministic
};

// Arrival trace of recurrence `r`: same templates, timings drawn from (seed, r).
std::vector<SubQueryInstance> recurrence_arrivals(const SimConfig& cfg, int r);

// Fully deterministic per seed.
RunReport run(const SimConfig& cfg);

// Rebuilds windows and totals from a log. `sla_override` re-prices every
// outcome under a different SLA book.
RunReport replay(const EventLog& log, const std::map<Id, ConsumerSla>* sla_override = nullptr);

void write_windows_csv(std::ostream& os, const RunReport& report);
void write_timing_csv(std::ostream& os, const RunReport& report);
std::string summary_json(const RunReport& report, const std::string& config_echo);

}  // namespace acoca
