#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acoca/core_model.hpp"

namespace acoca {

enum class EvictionPolicy { Random, LFU, LVF, TAH, NoEviction };

const char* to_string(EvictionPolicy p);
EvictionPolicy eviction_policy_from_string(const std::string& s);

struct ValueWeights {
  double kappa = 1.0;
  double mu = 1.0;
  double nu = 1.0;
};

struct EvictionConfig {
  EvictionPolicy policy = EvictionPolicy::LFU;
  double eta = 1.0;
  ValueWeights weights;

  void validate() const;
};

struct ItemView {
  Id id;
  Seconds cached_at = 0;
  Seconds expected_cl = kInfinite;  // E[CL] granted at admission
  double recent_accesses = 0;       // accesses over the last `mid` windows
  Seconds mean_retrieval_latency = 0;

  Seconds remaining_cl(Seconds now) const;
  // E[CL] elapsed, or less than eta of it remains.
  bool time_eligible(Seconds now, double eta) const;
};

struct EntityView : ItemView {
  std::vector<ItemView> attributes;
};

struct CacheView {
  std::vector<EntityView> entities;
};

struct VictimPlan {
  std::vector<Id> mandatory_entities;
  std::vector<std::pair<Id, Id>> selective_attributes;  // (entity, attribute)
  int freed_units = 0;
  bool fallback = false;
  bool empty() const { return mandatory_entities.empty() && selective_attributes.empty(); }
};

struct InsufficientEvictable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Popularity, remaining lifetime and retrieval latency relative to the
// maxima of the same level, each clamped to [0,1].
struct LevelMaxima {
  double popularity = 0;
  Seconds latency = 0;
};
LevelMaxima level_maxima(const std::vector<const ItemView*>& level);
double value_of(const ItemView& item, const LevelMaxima& maxima, Seconds now,
                const ValueWeights& weights);

// Scores per entity and attribute for one policy. Lower is evicted first.
struct LevelScores {
  std::vector<double> entity;
  std::vector<std::vector<double>> attribute;
};
LevelScores score_cache(EvictionPolicy policy, const CacheView& view, Seconds now,
                        const ValueWeights& weights, std::mt19937_64* rng);

// Threshold split over a ranked list of entities; see VictimPlan.
VictimPlan plan_from_scores(const CacheView& view, const LevelScores& scores,
                            const std::vector<std::size_t>& candidates, int needed_units,
                            double eta, const std::vector<std::vector<bool>>* attribute_allowed);

VictimPlan select_victims(const EvictionConfig& cfg, const CacheView& view, int needed_units,
                          Seconds now, std::mt19937_64& rng);

VictimPlan tah_select(const CacheView& view, int needed_units, double eta, Seconds now,
                      const ValueWeights& weights = {});

}  // namespace acoca
