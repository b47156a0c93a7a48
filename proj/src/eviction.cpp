#include "acoca/eviction.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace acoca {

const char* to_string(EvictionPolicy p) {
  switch (p) {
    case EvictionPolicy::Random: return "random";
    case EvictionPolicy::LFU: return "lfu";
    case EvictionPolicy::LVF: return "lvf";
    case EvictionPolicy::TAH: return "tah";
    case EvictionPolicy::NoEviction: return "none";
  }
  return "none";
}

EvictionPolicy eviction_policy_from_string(const std::string& s) {
  if (s == "random") return EvictionPolicy::Random;
  if (s == "lfu") return EvictionPolicy::LFU;
  if (s == "lvf") return EvictionPolicy::LVF;
  if (s == "tah") return EvictionPolicy::TAH;
  if (s == "none") return EvictionPolicy::NoEviction;
  throw std::invalid_argument("unknown eviction policy: " + s);
}

void EvictionConfig::validate() const {
  if (!(eta >= 0 && eta <= 1)) throw std::invalid_argument("eviction.eta must be in [0,1]");
  if (!(weights.kappa >= 0 && weights.mu >= 0 && weights.nu >= 0))
    throw std::invalid_argument("eviction value weights must be >= 0");
}

Seconds ItemView::remaining_cl(Seconds now) const {
  if (is_infinite(expected_cl)) return kInfinite;
  return std::max(0.0, cached_at + expected_cl - now);
}

bool ItemView::time_eligible(Seconds now, double eta) const {
  if (is_infinite(expected_cl)) return false;
  const Seconds rem = remaining_cl(now);
  return rem <= 0 || rem < eta * expected_cl;
}

LevelMaxima level_maxima(const std::vector<const ItemView*>& level) {
  LevelMaxima m;
  for (const auto* v : level) {
    m.popularity = std::max(m.popularity, v->recent_accesses);
    m.latency = std::max(m.latency, v->mean_retrieval_latency);
  }
  return m;
}

double value_of(const ItemView& item, const LevelMaxima& maxima, Seconds now,
                const ValueWeights& w) {
  auto ratio = [](double num, double den) {
    return den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
  };
  const double pop = ratio(item.recent_accesses, maxima.popularity);
  double life;
  if (is_infinite(item.expected_cl)) life = 1.0;
  else life = ratio(item.remaining_cl(now), item.expected_cl);
  const double lat = ratio(item.mean_retrieval_latency, maxima.latency);
  return w.kappa * pop + w.mu * life + w.nu * lat;
}

LevelScores score_cache(EvictionPolicy policy, const CacheView& view, Seconds now,
                        const ValueWeights& weights, std::mt19937_64* rng) {
  LevelScores s;
  s.entity.resize(view.entities.size());
  s.attribute.resize(view.entities.size());
  std::vector<const ItemView*> ents, attrs;
  for (const auto& e : view.entities) {
    ents.push_back(&e);
    for (const auto& a : e.attributes) attrs.push_back(&a);
  }
  const LevelMaxima em = level_maxima(ents), am = level_maxima(attrs);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < view.entities.size(); ++i) {
    const auto& e = view.entities[i];
    auto& as = s.attribute[i];
    as.resize(e.attributes.size());
    switch (policy) {
      case EvictionPolicy::Random:
        s.entity[i] = u(*rng);
        for (auto& x : as) x = u(*rng);
        break;
      case EvictionPolicy::LFU:
      case EvictionPolicy::NoEviction:
        s.entity[i] = e.recent_accesses;
        for (std::size_t k = 0; k < as.size(); ++k) as[k] = e.attributes[k].recent_accesses;
        break;
      case EvictionPolicy::LVF:
        s.entity[i] = value_of(e, em, now, weights);
        for (std::size_t k = 0; k < as.size(); ++k)
          as[k] = value_of(e.attributes[k], am, now, weights);
        break;
      case EvictionPolicy::TAH:
        s.entity[i] = value_of(e, em, now, weights);
        for (std::size_t k = 0; k < as.size(); ++k) as[k] = e.attributes[k].recent_accesses;
        break;
    }
  }
  return s;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

VictimPlan plan_from_scores(const CacheView& view, const LevelScores& scores,
                            const std::vector<std::size_t>& candidates, int needed_units,
                            double eta, const std::vector<std::vector<bool>>* attribute_allowed) {
  std::vector<std::size_t> order = candidates;
  auto key = [&](std::size_t i) {
    const auto& e = view.entities[i];
    return std::tie(scores.entity[i], e.cached_at, e.id);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  std::vector<double> cand_scores;
  for (auto i : order) cand_scores.push_back(scores.entity[i]);
  const double threshold = eta * median(cand_scores);

  std::vector<std::size_t> mandatory;
  std::vector<std::size_t> selective;  // rank positions into `order`
  std::vector<std::vector<std::size_t>> trimmed(view.entities.size());
  int freed = 0;
  for (std::size_t r = 0; r < order.size() && freed < needed_units; ++r) {
    const std::size_t i = order[r];
    if (scores.entity[i] < threshold) {
      mandatory.push_back(r);
      ++freed;
      continue;
    }
    selective.push_back(r);
    const auto& as = scores.attribute[i];
    const double attr_threshold = eta * median(as);
    for (std::size_t k = 0; k < as.size(); ++k) {
      if (attribute_allowed && !(*attribute_allowed)[i][k]) continue;
      if (as[k] < attr_threshold) trimmed[i].push_back(k);
    }
  }
  for (std::size_t s = 0; s < selective.size() && freed < needed_units; ++s) {
    mandatory.push_back(selective[s]);
    trimmed[order[selective[s]]].clear();
    ++freed;
  }
  std::sort(mandatory.begin(), mandatory.end());

  VictimPlan plan;
  for (auto r : mandatory) plan.mandatory_entities.push_back(view.entities[order[r]].id);
  for (auto r : selective) {
    const std::size_t i = order[r];
    for (auto k : trimmed[i])
      plan.selective_attributes.emplace_back(view.entities[i].id, view.entities[i].attributes[k].id);
  }
  plan.freed_units = freed;
  return plan;
}

VictimPlan select_victims(const EvictionConfig& cfg, const CacheView& view, int needed_units,
                          Seconds now, std::mt19937_64& rng) {
  if (needed_units < 1) throw std::invalid_argument("select_victims: needed_units must be >= 1");
  if (cfg.policy == EvictionPolicy::NoEviction)
    throw InsufficientEvictable("eviction disabled");
  if (view.entities.size() < static_cast<std::size_t>(needed_units))
    throw InsufficientEvictable("not enough cached entities to free the requested units");
  if (cfg.policy == EvictionPolicy::TAH) return tah_select(view, needed_units, cfg.eta, now, cfg.weights);
  const LevelScores scores = score_cache(cfg.policy, view, now, cfg.weights, &rng);
  std::vector<std::size_t> all(view.entities.size());
  std::iota(all.begin(), all.end(), 0);
  return plan_from_scores(view, scores, all, needed_units, cfg.eta, nullptr);
}

VictimPlan tah_select(const CacheView& view, int needed_units, double eta, Seconds now,
                      const ValueWeights& weights) {
  if (view.entities.size() < static_cast<std::size_t>(needed_units))
    throw InsufficientEvictable("not enough cached entities to free the requested units");
  const LevelScores scores = score_cache(EvictionPolicy::TAH, view, now, weights, nullptr);
  std::vector<std::size_t> eligible;
  std::vector<std::vector<bool>> allowed(view.entities.size());
  for (std::size_t i = 0; i < view.entities.size(); ++i) {
    const auto& e = view.entities[i];
    if (e.time_eligible(now, eta)) eligible.push_back(i);
    for (const auto& a : e.attributes) allowed[i].push_back(a.time_eligible(now, eta));
  }
  if (eligible.size() >= static_cast<std::size_t>(needed_units))
    return plan_from_scores(view, scores, eligible, needed_units, eta, &allowed);
  std::vector<std::size_t> all(view.entities.size());
  std::iota(all.begin(), all.end(), 0);
  VictimPlan plan = plan_from_scores(view, scores, all, needed_units, eta, nullptr);
  plan.fallback = true;
  return plan;
}

}  // namespace acoca
