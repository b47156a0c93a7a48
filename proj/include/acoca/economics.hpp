#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "acoca/cache_engine.hpp"
#include "acoca/core_model.hpp"

namespace acoca {

struct AccessOutcome {
  std::uint64_t query_id = 0;
  Id template_id;
  Id sla_id;
  Seconds arrival_time = 0;
  Seconds response_time = 0;
  bool valid = true;
  bool delayed = false;
  Money retrieval_costs_charged;
  int retrievals_triggered = 0;
  HitKind hit_kind = HitKind::Miss;
  bool ghost = false;  // at least one attribute was served from the ghost buffer
  int attribute_accesses = 0;
  int fresh_attribute_hits = 0;
  std::int64_t window_index = 0;
};

struct ReturnParts {
  Money earnings;
  Money penalties;
  Money retrieval_cost;
  Money total() const { return earnings - penalties - retrieval_cost; }
  ReturnParts& operator+=(const ReturnParts& o);
};

ReturnParts price_outcome(const AccessOutcome& o, const ConsumerSla& sla);
Money per_access_return(const AccessOutcome& o, const ConsumerSla& sla);
// Prices under `sla` with the delay flag recomputed from its RT_max.
Money reprice(const AccessOutcome& o, const ConsumerSla& sla);

Money expected_cached_return(const ConsumerSla& sla, double expected_hit_rate,
                             Money refresh_cost);

// Worst case across the SLAs used in a window: lowest price, highest delay
// penalty, tightest RT_max, highest invalid penalty.
ConsumerSla pessimistic_sla(const std::vector<const ConsumerSla*>& slas);

struct PessiRet {
  double value = 0;  // mean per query
  bool empty = true;
};
PessiRet pessi_ret(const std::vector<AccessOutcome>& window, const std::map<Id, ConsumerSla>& book);

struct WindowMetrics {
  std::int64_t window_index = 0;
  std::uint64_t queries = 0;
  bool empty = true;
  double mean_rt = 0;
  double hr = 0;
  double pd = 0;
  double throughput = 0;
  double cache_throughput = 0;
  std::uint64_t retrieval_count = 0;
  std::uint64_t entity_evictions = 0;
  std::uint64_t attribute_evictions = 0;
  double pessi_ret = 0;
  double mean_ret = 0;
  ReturnParts parts;
  int capacity_units = 0;
  int occupied_entities = 0;
};

struct WindowCounters {
  std::uint64_t retrieval_count = 0;
  std::uint64_t entity_evictions = 0;
  std::uint64_t attribute_evictions = 0;
  int capacity_units = 0;
  int occupied_entities = 0;
};

WindowMetrics window_metrics(std::int64_t window_index, const std::vector<AccessOutcome>& window,
                             const WindowCounters& counters, const std::map<Id, ConsumerSla>& book,
                             Seconds window_seconds);

struct TotalReturn {
  ReturnParts parts;
  std::uint64_t queries = 0;
  Money total() const { return parts.total(); }
};
TotalReturn total_return(const std::vector<AccessOutcome>& outcomes,
                         const std::map<Id, ConsumerSla>& book);

}  // namespace acoca
