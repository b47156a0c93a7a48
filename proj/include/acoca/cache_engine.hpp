#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "acoca/core_model.hpp"
#include "acoca/eviction.hpp"

namespace acoca {

enum class CacheMode { Redirector, Database, Limited, Scalable };

const char* to_string(CacheMode m);
CacheMode cache_mode_from_string(const std::string& s);

struct CacheEntry {
  Id item_id;
  Id entity_id;
  Seconds cached_at = 0;
  Seconds last_refreshed_at = 0;
  Seconds value_age_at_refresh = 0;  // the retrieval latency of the held value
  Seconds expected_cl = kInfinite;
  Seconds lifetime = kInfinite;      // effective lifetime of the attribute
  std::uint64_t access_count_window = 0;
  Id provider_id;

  Seconds age(Seconds now) const { return now - last_refreshed_at + value_age_at_refresh; }
  double freshness(Seconds now) const { return freshness_at(age(now), lifetime); }
  Seconds expires_at() const { return cached_at + expected_cl; }
};

struct EntityShell {
  Id entity_id;
  Seconds cached_at = 0;
  std::map<Id, CacheEntry> attributes;
};

enum class HitKind { Complete, Partial, Miss };

const char* to_string(HitKind k);

struct LookupResult {
  HitKind kind = HitKind::Miss;
  std::vector<Id> fresh;
  std::vector<Id> stale_or_missing;
  std::vector<Id> ghost_served;  // subset of `fresh` served from the ghost buffer
};

struct AdmitResult {
  bool admitted = false;
  int required_units = 0;  // entity slots still needed when not admitted
  bool new_entity = false;
};

struct RemovedEntry {
  CacheEntry entry;
  bool ghosted = false;
  bool premature = false;  // removed before its E[CL] elapsed
};

struct EvictResult {
  std::vector<RemovedEntry> removed;       // attribute entries
  std::vector<Id> removed_entities;        // shells that disappeared
  int entity_evictions = 0;
  int attribute_evictions = 0;
};

struct CannotShrinkBelowOccupancy : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ItemNotCached : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModeError : std::logic_error {
  using std::logic_error::logic_error;
};

struct CacheConfig {
  CacheMode mode = CacheMode::Scalable;
  int capacity_units = 1;
  int max_units = 2;              // growth ceiling in scalable mode
  int unit_size_entities = 3;
  double shrink_threshold = 0.5;  // utilization below this for `long` windows
  double ghost_min_freshness = 0.0;

  void validate() const;
};

enum class ScaleDirection { Grow, Shrink };

// Per-item figures the engine needs from the statistics tracker to build an
// eviction view.
struct ItemFigures {
  double recent_accesses = 0;
  Seconds mean_retrieval_latency = 0;
};
using FiguresFn = std::function<ItemFigures(const Id&)>;

class CacheEngine {
public:
  explicit CacheEngine(CacheConfig cfg);

  const CacheConfig& config() const { return cfg_; }
  CacheMode mode() const { return cfg_.mode; }
  bool caches() const { return cfg_.mode != CacheMode::Redirector; }

  LookupResult lookup(const std::vector<Id>& attribute_ids, double f_thresh, Seconds now) const;

  AdmitResult admit(const CacheEntry& entry, Seconds now);
  // Marks every cached attribute sourced from `provider_id` as refreshed.
  std::vector<Id> refresh_shared(const Id& provider_id, Seconds now, Seconds latency_sample);
  // Mandatory: whole entities. Selective: (entity, attribute) pairs.
  EvictResult evict(const VictimPlan& plan, Seconds now);
  EvictResult remove_attribute(const Id& attr_id, Seconds now);
  int scale(ScaleDirection dir, int units);
  void extend_cache_life(const Id& attr_id, Seconds new_expected_cl, Seconds now);

  // Serving-time bookkeeping for ghost entries; promotes nothing.
  void purge_ghosts(Seconds now);
  bool in_ghost(const Id& attr_id) const;
  std::optional<CacheEntry> ghost_entry(const Id& attr_id) const;
  std::size_t ghost_entity_count() const;

  bool is_cached(const Id& attr_id) const;
  const CacheEntry* find(const Id& attr_id) const;
  CacheEntry* find_mut(const Id& attr_id);
  const EntityShell* entity(const Id& entity_id) const;
  const std::map<Id, EntityShell>& entities() const { return entities_; }

  int capacity_units() const { return capacity_units_; }
  int capacity_slots() const;  // entity slots, unbounded modes report INT_MAX
  int occupied_slots() const { return static_cast<int>(entities_.size()); }
  std::size_t cached_attribute_count() const;
  double utilization() const;
  bool capacity_ok() const { return occupied_slots() <= capacity_slots(); }

  // Called once per sealed window; returns true when the cache shrank.
  bool observe_window(int long_windows);

  CacheView view(Seconds now, const FiguresFn& figures) const;
  std::string dump_json(Seconds now) const;

private:
  void to_ghost(const CacheEntry& e);

  CacheConfig cfg_;
  int capacity_units_;
  int low_utilization_windows_ = 0;
  std::map<Id, EntityShell> entities_;
  std::map<Id, Id> attr_owner_;  // attribute -> entity
  std::deque<EntityShell> ghost_;  // FIFO by entity
};

// Retrievals in flight per provider; a miss on a provider with a pending
// retrieval joins it.
class RetrievalCoalescer {
public:
  struct Flight {
    std::uint64_t retrieval_id = 0;
    Id provider_id;
    Seconds started = 0;
    Seconds completes_at = 0;
    Seconds latency = 0;
    bool failed = false;  // provider unavailable after the retry
    int joiners = 0;
  };

  // Returns the in-flight retrieval to `provider_id` when one completes after `now`.
  std::optional<Flight> pending(const Id& provider_id, Seconds now) const;
  const Flight& start(const Id& provider_id, Seconds now, Seconds latency, bool failed);
  void join(const Id& provider_id);
  void complete(const Id& provider_id, std::uint64_t retrieval_id);
  std::uint64_t started_count() const { return next_id_ - 1; }

private:
  std::map<Id, Flight> flights_;
  std::uint64_t next_id_ = 1;
};

// CLR, DTR, decision history index and per-item Ret sample lists.
class Registries {
public:
  explicit Registries(std::size_t ret_list_cap = 10) : ret_list_cap_(ret_list_cap) {}

  struct Timer {
    Seconds at = 0;
    std::uint64_t decision_id = 0;
    std::uint64_t token = 0;
  };

  std::uint64_t schedule_cl(const Id& item, Seconds at, std::uint64_t decision_id);
  std::uint64_t schedule_dt(const Id& item, Seconds at, std::uint64_t decision_id);
  std::optional<Timer> clr(const Id& item) const;
  std::optional<Timer> dtr(const Id& item) const;
  bool cancel_cl(const Id& item);
  bool cancel_dt(const Id& item);
  bool in_clr(const Id& item) const { return clr_.contains(item); }
  bool in_dtr(const Id& item) const { return dtr_.contains(item); }
  bool timer_current(const Id& item, std::uint64_t token) const;

  void record_decision(std::uint64_t decision_id) { history_.push_back(decision_id); }
  const std::vector<std::uint64_t>& decision_history() const { return history_; }

  // Appends to the item's Ret list; returns true when the list became full.
  bool add_ret_sample(const Id& item, Money ret);
  std::vector<Money> take_ret_samples(const Id& item);
  std::size_t ret_list_cap() const { return ret_list_cap_; }
  std::size_t ret_list_size(const Id& item) const;

private:
  std::size_t ret_list_cap_;
  std::uint64_t next_token_ = 1;
  std::map<Id, Timer> clr_, dtr_;
  std::vector<std::uint64_t> history_;
  std::map<Id, std::vector<Money>> profiles_;
};

}  // namespace acoca
