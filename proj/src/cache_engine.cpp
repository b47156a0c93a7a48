#include "acoca/cache_engine.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "json.hpp"

namespace acoca {

const char* to_string(CacheMode m) {
  switch (m) {
    case CacheMode::Redirector: return "redirector";
    case CacheMode::Database: return "database";
    case CacheMode::Limited: return "limited";
    case CacheMode::Scalable: return "scalable";
  }
  return "redirector";
}

CacheMode cache_mode_from_string(const std::string& s) {
  if (s == "redirector") return CacheMode::Redirector;
  if (s == "database") return CacheMode::Database;
  if (s == "limited") return CacheMode::Limited;
  if (s == "scalable") return CacheMode::Scalable;
  throw std::invalid_argument("unknown cache mode: " + s);
}

const char* to_string(HitKind k) {
  switch (k) {
    case HitKind::Complete: return "complete";
    case HitKind::Partial: return "partial";
    case HitKind::Miss: return "miss";
  }
  return "miss";
}

void CacheConfig::validate() const {
  if (capacity_units < 1) throw std::invalid_argument("cache.capacity_units must be >= 1");
  if (max_units < capacity_units) throw std::invalid_argument("cache.max_units must be >= capacity_units");
  if (unit_size_entities < 1) throw std::invalid_argument("cache.unit_size_entities must be >= 1");
  if (!(shrink_threshold >= 0 && shrink_threshold <= 1))
    throw std::invalid_argument("cache.shrink_threshold must be in [0,1]");
}

CacheEngine::CacheEngine(CacheConfig cfg) : cfg_(cfg), capacity_units_(cfg.capacity_units) {
  cfg_.validate();
}

int CacheEngine::capacity_slots() const {
  switch (cfg_.mode) {
    case CacheMode::Redirector: return 0;
    case CacheMode::Database: return INT_MAX;
    case CacheMode::Limited:
    case CacheMode::Scalable: return capacity_units_ * cfg_.unit_size_entities;
  }
  return 0;
}

std::size_t CacheEngine::cached_attribute_count() const { return attr_owner_.size(); }

double CacheEngine::utilization() const {
  if (cfg_.mode != CacheMode::Limited && cfg_.mode != CacheMode::Scalable) return 0.0;
  return static_cast<double>(occupied_slots()) / capacity_slots();
}

bool CacheEngine::is_cached(const Id& attr_id) const { return attr_owner_.contains(attr_id); }

const CacheEntry* CacheEngine::find(const Id& attr_id) const {
  auto it = attr_owner_.find(attr_id);
  if (it == attr_owner_.end()) return nullptr;
  return &entities_.at(it->second).attributes.at(attr_id);
}

CacheEntry* CacheEngine::find_mut(const Id& attr_id) {
  auto it = attr_owner_.find(attr_id);
  if (it == attr_owner_.end()) return nullptr;
  return &entities_.at(it->second).attributes.at(attr_id);
}

const EntityShell* CacheEngine::entity(const Id& entity_id) const {
  auto it = entities_.find(entity_id);
  return it == entities_.end() ? nullptr : &it->second;
}

bool CacheEngine::in_ghost(const Id& attr_id) const {
  for (const auto& g : ghost_)
    if (g.attributes.contains(attr_id)) return true;
  return false;
}

std::optional<CacheEntry> CacheEngine::ghost_entry(const Id& attr_id) const {
  for (const auto& g : ghost_)
    if (auto it = g.attributes.find(attr_id); it != g.attributes.end()) return it->second;
  return std::nullopt;
}

std::size_t CacheEngine::ghost_entity_count() const { return ghost_.size(); }

LookupResult CacheEngine::lookup(const std::vector<Id>& attribute_ids, double f_thresh,
                                 Seconds now) const {
  LookupResult r;
  for (const auto& a : attribute_ids) {
    if (const CacheEntry* e = find(a); e && e->freshness(now) >= f_thresh) {
      r.fresh.push_back(a);
      continue;
    }
    bool served = false;
    for (const auto& g : ghost_) {
      auto it = g.attributes.find(a);
      if (it != g.attributes.end() && it->second.freshness(now) >= f_thresh &&
          it->second.freshness(now) >= cfg_.ghost_min_freshness) {
        served = true;
        break;
      }
    }
    if (served) {
      r.fresh.push_back(a);
      r.ghost_served.push_back(a);
    } else {
      r.stale_or_missing.push_back(a);
    }
  }
  if (!attribute_ids.empty() && r.stale_or_missing.empty()) r.kind = HitKind::Complete;
  else if (!r.fresh.empty()) r.kind = HitKind::Partial;
  else r.kind = HitKind::Miss;
  return r;
}

AdmitResult CacheEngine::admit(const CacheEntry& entry, Seconds now) {
  if (cfg_.mode == CacheMode::Redirector) throw ModeError("redirector mode does not cache");
  AdmitResult r;
  auto shell = entities_.find(entry.entity_id);
  if (shell == entities_.end()) {
    if (occupied_slots() >= capacity_slots()) {
      r.required_units = 1;
      return r;
    }
    EntityShell s;
    s.entity_id = entry.entity_id;
    s.cached_at = now;
    shell = entities_.emplace(entry.entity_id, std::move(s)).first;
    r.new_entity = true;
  }
  CacheEntry e = entry;
  e.cached_at = now;
  e.last_refreshed_at = std::max(e.last_refreshed_at, e.cached_at);
  shell->second.attributes[e.item_id] = e;
  attr_owner_[e.item_id] = e.entity_id;
  for (auto& g : ghost_) g.attributes.erase(e.item_id);
  std::erase_if(ghost_, [](const EntityShell& g) { return g.attributes.empty(); });
  r.admitted = true;
  return r;
}

std::vector<Id> CacheEngine::refresh_shared(const Id& provider_id, Seconds now, Seconds latency) {
  std::vector<Id> out;
  for (auto& [eid, shell] : entities_)
    for (auto& [aid, e] : shell.attributes)
      if (e.provider_id == provider_id) {
        e.last_refreshed_at = now;
        e.value_age_at_refresh = latency;
        out.push_back(aid);
      }
  return out;
}

void CacheEngine::to_ghost(const CacheEntry& e) {
  for (auto& g : ghost_)
    if (g.entity_id == e.entity_id) {
      g.attributes[e.item_id] = e;
      return;
    }
  EntityShell s;
  s.entity_id = e.entity_id;
  s.cached_at = e.cached_at;
  s.attributes[e.item_id] = e;
  ghost_.push_back(std::move(s));
  while (ghost_.size() > static_cast<std::size_t>(cfg_.unit_size_entities)) ghost_.pop_front();
}

EvictResult CacheEngine::evict(const VictimPlan& plan, Seconds now) {
  EvictResult r;
  auto drop = [&](CacheEntry e) {
    RemovedEntry rem;
    rem.premature = !is_infinite(e.expected_cl) && now < e.expires_at();
    rem.ghosted = e.freshness(now) >= cfg_.ghost_min_freshness && e.freshness(now) > 0;
    if (rem.ghosted) to_ghost(e);
    attr_owner_.erase(e.item_id);
    rem.entry = std::move(e);
    r.removed.push_back(std::move(rem));
  };
  for (const auto& eid : plan.mandatory_entities) {
    auto it = entities_.find(eid);
    if (it == entities_.end()) continue;
    for (auto& [aid, e] : it->second.attributes) drop(e);
    r.attribute_evictions += static_cast<int>(it->second.attributes.size());
    entities_.erase(it);
    r.removed_entities.push_back(eid);
    ++r.entity_evictions;
  }
  for (const auto& [eid, aid] : plan.selective_attributes) {
    auto it = entities_.find(eid);
    if (it == entities_.end()) continue;
    auto a = it->second.attributes.find(aid);
    if (a == it->second.attributes.end()) continue;
    drop(a->second);
    it->second.attributes.erase(a);
    ++r.attribute_evictions;
    if (it->second.attributes.empty()) {
      r.removed_entities.push_back(eid);
      entities_.erase(it);
    }
  }
  return r;
}

EvictResult CacheEngine::remove_attribute(const Id& attr_id, Seconds now) {
  auto owner = attr_owner_.find(attr_id);
  if (owner == attr_owner_.end()) throw ItemNotCached("not cached: " + attr_id);
  VictimPlan p;
  p.selective_attributes.emplace_back(owner->second, attr_id);
  EvictResult r = evict(p, now);
  r.attribute_evictions = 0;  // expiry, not eviction
  return r;
}

int CacheEngine::scale(ScaleDirection dir, int units) {
  if (cfg_.mode != CacheMode::Scalable) throw ModeError("scale is only valid in scalable mode");
  if (units < 0) throw std::invalid_argument("scale units must be >= 0");
  if (dir == ScaleDirection::Grow) {
    capacity_units_ += units;
  } else {
    const int target = capacity_units_ - units;
    if (target < 1 || target * cfg_.unit_size_entities < occupied_slots())
      throw CannotShrinkBelowOccupancy("cannot shrink below occupied entity units");
    capacity_units_ = target;
  }
  return capacity_units_;
}

bool CacheEngine::observe_window(int long_windows) {
  if (cfg_.mode != CacheMode::Scalable) return false;
  if (utilization() < cfg_.shrink_threshold) ++low_utilization_windows_;
  else low_utilization_windows_ = 0;
  if (low_utilization_windows_ < long_windows) return false;
  low_utilization_windows_ = 0;
  const int needed = std::max(
      1, (occupied_slots() + cfg_.unit_size_entities - 1) / cfg_.unit_size_entities);
  if (needed >= capacity_units_) return false;
  capacity_units_ = needed;
  return true;
}

void CacheEngine::extend_cache_life(const Id& attr_id, Seconds new_expected_cl, Seconds now) {
  CacheEntry* e = find_mut(attr_id);
  if (!e) throw ItemNotCached("not cached: " + attr_id);
  e->expected_cl = is_infinite(new_expected_cl) ? kInfinite : (now - e->cached_at) + new_expected_cl;
}

void CacheEngine::purge_ghosts(Seconds now) {
  for (auto& g : ghost_)
    std::erase_if(g.attributes, [&](const auto& kv) {
      const double f = kv.second.freshness(now);
      return f < cfg_.ghost_min_freshness || f <= 0;
    });
  std::erase_if(ghost_, [](const EntityShell& g) { return g.attributes.empty(); });
}

CacheView CacheEngine::view(Seconds now, const FiguresFn& figures) const {
  (void)now;
  CacheView v;
  for (const auto& [eid, shell] : entities_) {
    EntityView ev;
    ev.id = eid;
    ev.cached_at = shell.cached_at;
    Seconds last_expiry = shell.cached_at;
    double latency_sum = 0;
    for (const auto& [aid, e] : shell.attributes) {
      ItemView av;
      av.id = aid;
      av.cached_at = e.cached_at;
      av.expected_cl = e.expected_cl;
      const ItemFigures f = figures ? figures(aid) : ItemFigures{};
      av.recent_accesses = f.recent_accesses;
      av.mean_retrieval_latency = f.mean_retrieval_latency;
      latency_sum += f.mean_retrieval_latency;
      last_expiry = std::max(last_expiry, e.expires_at());
      ev.attributes.push_back(std::move(av));
    }
    ev.expected_cl = is_infinite(last_expiry) ? kInfinite : last_expiry - shell.cached_at;
    const ItemFigures ef = figures ? figures(eid) : ItemFigures{};
    ev.recent_accesses = ef.recent_accesses;
    ev.mean_retrieval_latency =
        shell.attributes.empty() ? 0.0 : latency_sum / static_cast<double>(shell.attributes.size());
    v.entities.push_back(std::move(ev));
  }
  return v;
}

std::string CacheEngine::dump_json(Seconds now) const {
  using nlohmann::json;
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json("inf"); };
  json j;
  j["time"] = now;
  j["mode"] = to_string(cfg_.mode);
  j["capacity_units"] = capacity_units_;
  j["occupied_entities"] = occupied_slots();
  json ents = json::array();
  for (const auto& [eid, shell] : entities_) {
    json je{{"entity_id", eid}, {"cached_at", shell.cached_at}};
    json attrs = json::array();
    for (const auto& [aid, e] : shell.attributes) {
      const Seconds remaining = is_infinite(e.expected_cl) ? kInfinite : e.expires_at() - now;
      attrs.push_back({{"attr_id", aid},
                       {"age", e.age(now)},
                       {"freshness", e.freshness(now)},
                       {"cl_remaining", num(remaining)},
                       {"provider_id", e.provider_id}});
    }
    je["attributes"] = std::move(attrs);
    ents.push_back(std::move(je));
  }
  j["entities"] = std::move(ents);
  json ghosts = json::array();
  for (const auto& g : ghost_)
    for (const auto& [aid, e] : g.attributes)
      ghosts.push_back({{"attr_id", aid}, {"freshness", e.freshness(now)}});
  j["ghost"] = std::move(ghosts);
  return j.dump();
}

std::optional<RetrievalCoalescer::Flight> RetrievalCoalescer::pending(const Id& provider_id,
                                                                      Seconds now) const {
  auto it = flights_.find(provider_id);
  if (it == flights_.end() || !(now < it->second.completes_at)) return std::nullopt;
  return it->second;
}

const RetrievalCoalescer::Flight& RetrievalCoalescer::start(const Id& provider_id, Seconds now,
                                                            Seconds latency, bool failed) {
  Flight f;
  f.retrieval_id = next_id_++;
  f.provider_id = provider_id;
  f.started = now;
  f.latency = latency;
  f.completes_at = now + latency;
  f.failed = failed;
  return flights_[provider_id] = f;
}

void RetrievalCoalescer::join(const Id& provider_id) {
  auto it = flights_.find(provider_id);
  if (it != flights_.end()) ++it->second.joiners;
}

void RetrievalCoalescer::complete(const Id& provider_id, std::uint64_t retrieval_id) {
  auto it = flights_.find(provider_id);
  if (it != flights_.end() && it->second.retrieval_id == retrieval_id) flights_.erase(it);
}

std::uint64_t Registries::schedule_cl(const Id& item, Seconds at, std::uint64_t decision_id) {
  dtr_.erase(item);
  const std::uint64_t token = next_token_++;
  clr_[item] = Timer{at, decision_id, token};
  return token;
}

std::uint64_t Registries::schedule_dt(const Id& item, Seconds at, std::uint64_t decision_id) {
  clr_.erase(item);
  const std::uint64_t token = next_token_++;
  dtr_[item] = Timer{at, decision_id, token};
  return token;
}

std::optional<Registries::Timer> Registries::clr(const Id& item) const {
  auto it = clr_.find(item);
  if (it == clr_.end()) return std::nullopt;
  return it->second;
}

std::optional<Registries::Timer> Registries::dtr(const Id& item) const {
  auto it = dtr_.find(item);
  if (it == dtr_.end()) return std::nullopt;
  return it->second;
}

bool Registries::cancel_cl(const Id& item) { return clr_.erase(item) > 0; }
bool Registries::cancel_dt(const Id& item) { return dtr_.erase(item) > 0; }

bool Registries::timer_current(const Id& item, std::uint64_t token) const {
  if (auto it = clr_.find(item); it != clr_.end() && it->second.token == token) return true;
  if (auto it = dtr_.find(item); it != dtr_.end() && it->second.token == token) return true;
  return false;
}

bool Registries::add_ret_sample(const Id& item, Money ret) {
  auto& list = profiles_[item];
  list.push_back(ret);
  return list.size() >= ret_list_cap_;
}

std::vector<Money> Registries::take_ret_samples(const Id& item) {
  auto it = profiles_.find(item);
  if (it == profiles_.end()) return {};
  std::vector<Money> out = std::move(it->second);
  profiles_.erase(it);
  return out;
}

std::size_t Registries::ret_list_size(const Id& item) const {
  auto it = profiles_.find(item);
  return it == profiles_.end() ? 0 : it->second.size();
}

}  // namespace acoca
