#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "acoca/core_model.hpp"

namespace acoca {

struct WindowConfig {
  Seconds window_seconds = 5.0;
  int short_ = 1;
  int mid = 5;
  int long_ = 10;

  void validate() const;  // throws std::invalid_argument
  std::size_t ring_capacity() const { return static_cast<std::size_t>(long_) + 1; }
};

// Per-window series ordered newest first: element k-1 holds window T-k.
class WindowHistory {
public:
  WindowHistory() = default;
  static WindowHistory from_newest_first(std::span<const double> values);
  static WindowHistory from_oldest_first(std::span<const double> values);

  // Value at T-lag (lag >= 1); windows outside the retained range read 0.
  double at_lag(int lag) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  void push_newest(double v, std::size_t capacity);
  const std::deque<double>& newest_first() const { return values_; }

private:
  std::deque<double> values_;
};

struct Horizons {
  double short_v = 0;
  double mid_v = 0;
  double long_v = 0;
  // (long, mid, short), the order used by the agent state.
  std::array<double, 3> table_order() const { return {long_v, mid_v, short_v}; }
};

Horizons summarize_observed(const WindowHistory& history, const WindowConfig& cfg);

// Least-squares line over the last `long` windows, evaluated `short`, `mid`
// and `long` windows past the most recent sealed window.
Horizons extrapolate_expected(const WindowHistory& history, const WindowConfig& cfg,
                              bool clamp_unit = true);

double expected_hit_rate(Seconds e_rel, double e_lambda, double e_ar, Seconds lifetime,
                         double f_arrive, double f_thresh);

struct WindowCounts {
  std::uint32_t n = 0;  // accesses
  std::uint32_t m = 0;  // fresh cache hits
  std::uint32_t total_queries = 0;
  bool cached = false;  // item resided in cache at some point during the window
};

class RunningMean {
public:
  void add(double x) { ++count_; mean_ += (x - mean_) / static_cast<double>(count_); }
  double mean() const { return mean_; }
  std::uint64_t count() const { return count_; }

private:
  double mean_ = 0;
  std::uint64_t count_ = 0;
};

struct ItemStats {
  Id item_id;
  std::deque<WindowCounts> sealed;  // newest first, at most long+1
  WindowCounts current;
  RunningMean cached_lifetime;
  RunningMean retrieval_latency;
  RunningMean retrieval_cost;
  std::uint64_t cached_accesses = 0;
  std::uint64_t delayed_cached_accesses = 0;

  WindowHistory access_rate_history() const;
  WindowHistory hit_rate_history() const;
  double delay_given_cached() const;
  bool ever_cached() const;
  // Accesses summed over the most recent `windows` sealed windows.
  std::uint64_t recent_accesses(int windows) const;
};

struct FeatureScales {
  Seconds cached_lifetime = 50.0;
  Seconds retrieval_latency = 1.0;
  double retrieval_cost = 1.0;
};

inline constexpr std::size_t kStateSize = 15;

// AR(long,mid,short), E[AR](long,mid,short), HR(long,mid,short),
// E[HR](long,mid,short), mean CL, mean retrieval latency, mean retrieval cost.
struct StateVector {
  std::array<double, kStateSize> values{};

  double ar_short() const { return values[2]; }
  double ar_mid() const { return values[1]; }
  double expected_ar_mid() const { return values[4]; }
  double mean_cached_lifetime() const { return values[12]; }
  double mean_retrieval_latency() const { return values[13]; }
  double mean_retrieval_cost() const { return values[14]; }

  std::array<double, kStateSize> normalized(const FeatureScales& scales) const;
  bool operator==(const StateVector&) const = default;
};

// `heuristic_hit_rate`, when given, replaces the E[HR] features of an item that
// has never been observed in the cache.
StateVector build_state_vector(const ItemStats& stats, const WindowConfig& cfg,
                               std::optional<Horizons> heuristic_hit_rate = std::nullopt);

bool detect_spike(const ItemStats& stats, const WindowConfig& cfg, double spike_factor);

struct ItemWindowRow {
  std::int64_t window_index;
  Id item_id;
  WindowCounts counts;
};

class StatsTracker {
public:
  explicit StatsTracker(WindowConfig cfg);

  const WindowConfig& config() const { return cfg_; }
  std::int64_t current_window() const { return window_index_; }
  Seconds window_start() const { return static_cast<double>(window_index_) * cfg_.window_seconds; }

  void record_query(Seconds now);
  void record_access(const Id& item, bool was_fresh_cache_hit, Seconds now);
  void record_retrieval(const Id& item, Seconds latency, Money cost);
  void record_cached_lifetime(const Id& item, Seconds residence);
  void record_cached_access(const Id& item, bool delayed);
  void mark_cached(const Id& item);

  // Seals the current window; rows of the sealed window are kept in last_sealed().
  std::int64_t roll_window(Seconds now);
  const std::vector<ItemWindowRow>& last_sealed() const { return last_sealed_; }

  const ItemStats& item(const Id& id);  // creates zeroed stats for new items
  const ItemStats* find(const Id& id) const;
  // Mean queries per second over the retained sealed windows, or `fallback`.
  double query_rate(double fallback) const;

private:
  ItemStats& touch(const Id& id);

  WindowConfig cfg_;
  std::int64_t window_index_ = 0;
  Seconds last_roll_ = 0;
  std::uint32_t current_queries_ = 0;
  std::deque<std::uint32_t> query_history_;  // newest first
  std::map<Id, ItemStats> items_;
  std::vector<ItemWindowRow> last_sealed_;
};

void write_item_stats_csv_header(std::ostream& os);
void write_item_stats_rows(std::ostream& os, const std::vector<ItemWindowRow>& rows);

}  // namespace acoca
