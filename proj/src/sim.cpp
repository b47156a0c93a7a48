#include "acoca/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "acoca/config.hpp"

namespace acoca {

using nlohmann::json;

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::RetrievalComplete: return "retrieval_complete";
    case EventKind::CLExpiry: return "cl_expiry";
    case EventKind::RewardDue: return "reward_due";
    case EventKind::DTExpiry: return "dt_expiry";
    case EventKind::RetListFull: return "ret_list_full";
    case EventKind::QueryArrival: return "query_arrival";
    case EventKind::WindowRoll: return "window_roll";
  }
  return "query_arrival";
}

void SimConfig::validate() const {
  auto range = [](const std::string& field, const std::string& msg) {
    throw ConfigError(ConfigError::Code::Range, field, field + ": " + msg);
  };
  auto wrap = [&](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      range(field, e.what());
    }
  };
  wrap("agent", [&] { agent.validate(); });
  wrap("eviction", [&] { eviction.validate(); });
  wrap("cache", [&] { cache.validate(); });
  wrap("windows", [&] { windows.validate(); });
  if (recurrences < 1) range("recurrences", "must be >= 1");
  if (!(cache_seek_seconds >= 0) || !std::isfinite(cache_seek_seconds))
    range("cache_seek_seconds", "must be finite and >= 0");
  if (!(spike_factor > 0)) range("spike_factor", "must be > 0");
  if (ret_list_cap < 1) range("ret_list_cap", "must be >= 1");
}

namespace {

struct Pending {
  Decision d;
  Id sla_id;
  bool admitted = false;
  bool rewarded = false;
  int accesses = 0;
  std::vector<double> rets;
  double expected_ret = 0;
};


double normal_tail(double x, double mean, double var) {
  if (var <= 0) return x < mean ? 1.0 : 0.0;
  return 0.5 * std::erfc((x - mean) / std::sqrt(2.0 * var));
}

json counters_to_json(const RecurrenceCounters& c) {
  return {{"decisions", c.decisions},
          {"cache_decisions", c.cache_decisions},
          {"explored", c.explored},
          {"rewards", c.rewards},
          {"learning_steps", c.learning_steps},
          {"admissions", c.admissions},
          {"failed_admissions", c.failed_admissions},
          {"entity_evictions", c.entity_evictions},
          {"attribute_evictions", c.attribute_evictions},
          {"premature_evictions", c.premature_evictions},
          {"cl_extensions", c.cl_extensions},
          {"retrievals", c.retrievals},
          {"coalesced", c.coalesced},
          {"ghost_hits", c.ghost_hits},
          {"spike_bypasses", c.spike_bypasses},
          {"retrieval_ledger", c.retrieval_ledger.micros()},
          {"epsilon_end", c.epsilon_end},
          {"delta_end", c.delta_end},
          {"capacity_respected", c.capacity_respected},
          {"min_response_time", is_infinite(c.min_response_time) ? json(nullptr)
                                                                  : json(c.min_response_time)}};
}

RecurrenceCounters counters_from_json(const json& j) {
  RecurrenceCounters c;
  c.decisions = j.at("decisions");
  c.cache_decisions = j.at("cache_decisions");
  c.explored = j.at("explored");
  c.rewards = j.at("rewards");
  c.learning_steps = j.at("learning_steps");
  c.admissions = j.at("admissions");
  c.failed_admissions = j.at("failed_admissions");
  c.entity_evictions = j.at("entity_evictions");
  c.attribute_evictions = j.at("attribute_evictions");
  c.premature_evictions = j.at("premature_evictions");
  c.cl_extensions = j.at("cl_extensions");
  c.retrievals = j.at("retrievals");
  c.coalesced = j.at("coalesced");
  c.ghost_hits = j.at("ghost_hits");
  c.spike_bypasses = j.at("spike_bypasses");
  c.retrieval_ledger = Money::from_micros(j.at("retrieval_ledger").get<std::int64_t>());
  c.epsilon_end = j.at("epsilon_end");
  c.delta_end = j.at("delta_end");
  c.capacity_respected = j.at("capacity_respected");
  c.min_response_time = j.at("min_response_time").is_null() ? kInfinite
                                                          : j.at("min_response_time").get<double>();
  return c;
}

class Simulation {
public:
  Simulation(const SimConfig& cfg, const ValidatedCatalog& cat, Agent* agent, int rec,
             EventLog& log)
      : cfg_(cfg),
        cat_(cat),
        agent_(agent),
        rec_(rec),
        log_(log),
        stats_(cfg.windows),
        cache_(cache_config(cfg, cat)),
        reg_(cfg.ret_list_cap) {
    std::seed_seq lat{cfg.seed, static_cast<std::uint64_t>(rec), std::uint64_t{1}};
    latency_rng_.seed(lat);
    std::seed_seq ev{cfg.seed, static_cast<std::uint64_t>(rec), std::uint64_t{2}};
    evict_rng_.seed(ev);
    if (!uses_agent()) agent_ = nullptr;
  }

  RecurrenceCounters run(const std::vector<SubQueryInstance>& arrivals) {
    arrivals_ = &arrivals;
    for (std::size_t i = 0; i < arrivals.size(); ++i)
      push(arrivals[i].arrival_time, EventKind::QueryArrival, {}, i);
    const Seconds W = cfg_.windows.window_seconds;
    const auto windows = static_cast<std::int64_t>(std::ceil(cfg_.scenario.workload.duration / W - 1e-12));
    for (std::int64_t k = 1; k <= windows; ++k)
      push(static_cast<double>(k) * W, EventKind::WindowRoll, {}, static_cast<std::uint64_t>(k));
    std::int64_t rolled = 0;
    while (!queue_.empty() && rolled < windows) {
      const SimEvent e = queue_.top();
      queue_.pop();
      now_ = e.time;
      switch (e.kind) {
        case EventKind::QueryArrival: on_query(e.ref); break;
        case EventKind::RetrievalComplete: on_retrieval_complete(e.item, e.ref); break;
        case EventKind::CLExpiry: on_cl_expiry(e.item, e.ref); break;
        case EventKind::RewardDue: on_reward_due(e.ref); break;
        case EventKind::DTExpiry: on_dt_expiry(e.item, e.ref); break;
        case EventKind::RetListFull: on_ret_list_full(e.ref); break;
        case EventKind::WindowRoll: on_window_roll(); ++rolled; break;
      }
      if (cache_.mode() == CacheMode::Limited && !cache_.capacity_ok()) counters_.capacity_respected = false;
    }
    if (agent_) {
      for (auto& [id, p] : pending_)
        if (!p.rewarded) give_reward(p, RewardTrigger::EndOfRun, true);
      counters_.epsilon_end = agent_->exploration().epsilon;
      counters_.delta_end = agent_->exploration().delta;
      counters_.learning_steps = agent_->counters().learning_steps - learning_steps_at_start_;
    }
    log_.add({{"type", "recurrence"}, {"rec", rec_}, {"counters", counters_to_json(counters_)}});
    return counters_;
  }

  void set_learning_baseline(std::uint64_t steps) { learning_steps_at_start_ = steps; }
  std::vector<ItemWindowRow> item_rows;
  std::vector<double> decision_seconds;

private:
  static CacheConfig cache_config(const SimConfig& cfg, const ValidatedCatalog& cat) {
    CacheConfig c = cfg.cache;
    c.ghost_min_freshness = cat.min_freshness_threshold();
    return c;
  }

  bool uses_agent() const {
    return cache_.mode() == CacheMode::Limited || cache_.mode() == CacheMode::Scalable;
  }

  void push(Seconds t, EventKind k, Id item, std::uint64_t ref) {
    queue_.push(SimEvent{t, k, seq_++, std::move(item), ref});
  }

  Seconds sample_latency(const ContextProvider& p) {
    return sample_provider_latency(p, latency_rng_, cfg_.scenario.workload.latency_floor);
  }

  bool attempt_succeeds(const ContextProvider& p) {
    if (p.availability >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(latency_rng_) < p.availability;
  }

  ItemFigures figures(const Id& id) const {
    ItemFigures f;
    if (const ItemStats* s = stats_.find(id)) {
      f.recent_accesses = static_cast<double>(s->recent_accesses(cfg_.windows.mid) + s->current.n);
      f.mean_retrieval_latency = s->retrieval_latency.mean();
    }
    return f;
  }

  // ---- queries ----------------------------------------------------------

  void on_query(std::uint64_t idx) {
    const SubQueryInstance& sq = (*arrivals_)[idx];
    const SubQueryTemplate& tpl = cfg_.scenario.workload.templates[sq.template_index];
    const ConsumerSla& sla = cat_.sla(sq.sla_id);
    const std::vector<Id> attrs(tpl.attribute_ids.begin(), tpl.attribute_ids.end());
    stats_.record_query(now_);

    LookupResult lk;
    if (cache_.caches()) {
      lk = cache_.lookup(attrs, sla.freshness_threshold, now_);
    } else {
      lk.stale_or_missing = attrs;
      lk.kind = HitKind::Miss;
    }
    counters_.ghost_hits += lk.ghost_served.size();

    AccessOutcome o;
    o.query_id = idx;
    o.template_id = sq.template_id;
    o.sla_id = sq.sla_id;
    o.arrival_time = now_;
    o.hit_kind = lk.kind;
    o.ghost = !lk.ghost_served.empty();
    o.attribute_accesses = static_cast<int>(attrs.size());
    o.fresh_attribute_hits = static_cast<int>(lk.fresh.size());
    o.window_index = stats_.current_window();

    std::map<Id, std::vector<Id>> by_provider;
    for (const auto& a : lk.stale_or_missing)
      by_provider[cat_.primary_provider(a).provider_id].push_back(a);

    Seconds slowest = 0;
    bool failed = false;
    std::map<Id, std::uint64_t> flight_of;  // attribute -> retrieval id
    for (const auto& [pid, pattrs] : by_provider) {
      const ContextProvider& p = cat_.provider(pid);
      RetrievalCoalescer::Flight f;
      if (auto existing = coalescer_.pending(pid, now_)) {
        coalescer_.join(pid);
        ++counters_.coalesced;
        f = *existing;
      } else {
        int attempts = 1;
        Seconds latency = sample_latency(p);
        bool ok = attempt_succeeds(p);
        if (!ok) {
          ++attempts;
          latency += sample_latency(p);
          ok = attempt_succeeds(p);
        }
        const Money cost = Money::from_micros(p.cost_per_retrieval.micros() * attempts);
        o.retrieval_costs_charged += cost;
        o.retrievals_triggered += attempts;
        counters_.retrieval_ledger += cost;
        counters_.retrievals += static_cast<std::uint64_t>(attempts);
        window_retrievals_ += static_cast<std::uint64_t>(attempts);
        f = coalescer_.start(pid, now_, latency, !ok);
        push(f.completes_at, EventKind::RetrievalComplete, pid, f.retrieval_id);
        flights_[f.retrieval_id] = f;
        log_.add({{"type", "retrieval"}, {"rec", rec_}, {"t", now_}, {"id", f.retrieval_id},
                  {"provider", pid}, {"latency", latency}, {"attempts", attempts},
                  {"failed", !ok}});
      }
      for (const auto& a : pattrs) {
        flight_of[a] = f.retrieval_id;
        stats_.record_retrieval(a, f.latency, p.cost_per_retrieval);
      }
      slowest = std::max(slowest, f.completes_at - now_);
      failed = failed || f.failed;
    }

    o.response_time = cfg_.cache_seek_seconds + slowest;
    o.valid = !failed;
    o.delayed = o.response_time > sla.rt_max;
    counters_.min_response_time = std::min(counters_.min_response_time, o.response_time);

    const std::set<Id> fresh(lk.fresh.begin(), lk.fresh.end());
    std::map<Id, bool> entity_fresh;
    for (const auto& a : attrs) {
      const bool hit = fresh.contains(a);
      stats_.record_access(a, hit, now_);
      if (cache_.is_cached(a)) stats_.record_cached_access(a, o.delayed);
      const Id& e = cat_.attribute(a).entity_id;
      auto [it, inserted] = entity_fresh.emplace(e, hit);
      if (!inserted) it->second = it->second && hit;
    }
    for (const auto& [e, hit] : entity_fresh) stats_.record_access(e, hit, now_);

    const Money ret = per_access_return(o, sla);
    log_.add(outcome_to_json(o, rec_));

    if (cache_.mode() == CacheMode::Database) {
      for (const auto& [a, rid] : flight_of)
        if (db_waiting_.insert(a).second) db_admits_[rid].push_back(a);
      return;
    }
    if (!agent_) return;

    for (const auto& a : attrs) {
      auto act = active_.find(a);
      if (act == active_.end()) continue;
      Pending& p = pending_.at(act->second);
      if (p.rewarded) continue;
      if (p.d.action.cache) {
        if (!p.admitted || !cache_.is_cached(a)) continue;
        ++p.accesses;
        if (reg_.add_ret_sample(a, ret)) push(now_, EventKind::RetListFull, a, p.d.id);
      } else {
        ++p.accesses;
        p.rets.push_back(ret.value());
      }
    }

    for (const auto& a : attrs) {
      if (cache_.is_cached(a)) continue;
      if (auto act = active_.find(a); act != active_.end()) {
        Pending& p = pending_.at(act->second);
        if (p.d.action.cache && !p.rewarded) continue;  // admission in flight
        if (!p.d.action.cache && reg_.in_dtr(a)) {
          if (!detect_spike(stats_.item(a), cfg_.windows, cfg_.spike_factor)) continue;
          ++counters_.spike_bypasses;
          reg_.cancel_dt(a);
          if (!p.rewarded) give_reward(p, RewardTrigger::DTElapsed, false);
        }
        active_.erase(a);
      }
      Pending& p = decide(a, sq.sla_id);
      if (p.d.action.cache) {
        if (std::find(lk.ghost_served.begin(), lk.ghost_served.end(), a) != lk.ghost_served.end()) {
          if (auto g = cache_.ghost_entry(a)) {
            admit(p, *g);
            continue;
          }
        }
        auto f = flight_of.find(a);
        if (f != flight_of.end()) {
          flight_admits_[f->second].push_back(p.d.id);
        } else {
          fail_admission(p);
        }
      } else {
        schedule_dt(p);
      }
    }
  }

  // ---- decisions --------------------------------------------------------

  Pending& decide(const Id& a, const Id& sla_id) {
    const ConsumerSla& sla = cat_.sla(sla_id);
    const ItemStats& st = stats_.item(a);
    const ContextProvider& prov = cat_.primary_provider(a);
    const Seconds L = cat_.effective_lifetime(a);
    const Seconds rel = st.retrieval_latency.count() ? st.retrieval_latency.mean() : prov.latency_mean;
    const double f_arr = arrival_freshness(rel, L);
    const Seconds resil = residual_lifetime(f_arr, sla.freshness_threshold, rel);
    const double lambda = stats_.query_rate(cfg_.scenario.workload.lambda_rate);
    const Horizons e_ar = extrapolate_expected(st.access_rate_history(), cfg_.windows);
    auto ehr = [&](double x) {
      if (is_infinite(resil)) return f_arr > sla.freshness_threshold ? 1.0 : 0.0;
      return expected_hit_rate(resil, lambda, x, L, f_arr, sla.freshness_threshold);
    };
    const Horizons heur{ehr(e_ar.short_v), ehr(e_ar.mid_v), ehr(e_ar.long_v)};

    DecisionContext ctx;
    ctx.item_id = a;
    ctx.avg_cl = st.cached_lifetime.count() ? st.cached_lifetime.mean()
                                            : cfg_.windows.long_ * cfg_.windows.window_seconds;
    ctx.recent_frequency = static_cast<double>(st.recent_accesses(cfg_.windows.mid) + st.current.n);
    ctx.windows = cfg_.windows;
    ctx.stat.expected_ar_mid = e_ar.mid_v;
    ctx.stat.lambda = lambda;
    ctx.stat.window_seconds = cfg_.windows.window_seconds;
    ctx.stat.delay_penalty = sla.delay_penalty.value();
    ctx.stat.p_delay_uncached =
        normal_tail(sla.rt_max - cfg_.cache_seek_seconds, prov.latency_mean, prov.latency_var);
    ctx.stat.retrieval_cost = prov.cost_per_retrieval.value();
    ctx.stat.expected_hit_rate = heur.mid_v;
    ctx.stat.residual_lifetime = resil;
    ctx.stat.mid = cfg_.windows.mid;

    const StateVector state = build_state_vector(st, cfg_.windows, heur);
    const auto t0 = std::chrono::steady_clock::now();
    Decision d = agent_->decide(state, ctx, now_);
    window_decision_seconds_ +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Pending p;
    p.d = d;
    p.sla_id = sla_id;
    p.expected_ret = expected_cached_return(sla, heur.mid_v, prov.cost_per_retrieval).value();
    ++counters_.decisions;
    counters_.cache_decisions += d.action.cache;
    counters_.explored += d.explored;
    reg_.record_decision(d.id);
    active_[a] = d.id;
    log_.add({{"type", "decision"}, {"rec", rec_}, {"t", now_}, {"id", d.id}, {"item", a},
              {"cache", d.action.cache}, {"cl", d.action.cl}, {"dt", d.action.dt},
              {"raw", d.raw_output}, {"explored", d.explored}});
    return pending_[d.id] = std::move(p);
  }

  StateVector next_state(const Pending& p) {
    return build_state_vector(stats_.item(p.d.item_id), cfg_.windows);
  }

  void give_reward(Pending& p, RewardTrigger trigger, bool terminal) {
    RewardEvent ev;
    ev.decision_id = p.d.id;
    ev.trigger = trigger;
    ev.cached = p.d.action.cache;
    ev.access_count = p.accesses;
    ev.expected_ret = p.expected_ret;
    if (p.d.action.cache) {
      for (Money m : reg_.take_ret_samples(p.d.item_id)) ev.ret_samples.push_back(m.value());
    } else {
      ev.ret_samples = p.rets;
    }
    const double r = agent_->on_reward(p.d, ev, next_state(p), terminal);
    p.rewarded = true;
    ++counters_.rewards;
    log_.add({{"type", "reward"}, {"rec", rec_}, {"t", now_}, {"id", p.d.id}, {"item", p.d.item_id},
              {"trigger", to_string(trigger)}, {"accesses", p.accesses}, {"reward", r}});
  }

  void schedule_dt(Pending& p) {
    const Seconds at = static_cast<double>(stats_.current_window() + 1 + p.d.action.dt) *
                       cfg_.windows.window_seconds;
    const std::uint64_t token = reg_.schedule_dt(p.d.item_id, at, p.d.id);
    push(at, EventKind::DTExpiry, p.d.item_id, token);
  }

  void fail_admission(Pending& p) {
    ++counters_.failed_admissions;
    give_reward(p, RewardTrigger::PrematureEviction, false);
    if (auto it = active_.find(p.d.item_id); it != active_.end() && it->second == p.d.id) active_.erase(it);
  }

  bool ensure_space(const Id& entity_id) {
    if (cache_.entity(entity_id) || cache_.occupied_slots() < cache_.capacity_slots()) return true;
    if (cache_.mode() == CacheMode::Scalable && cache_.capacity_units() < cfg_.cache.max_units) {
      cache_.scale(ScaleDirection::Grow, 1);
      log_.add({{"type", "scale"}, {"rec", rec_}, {"t", now_}, {"units", cache_.capacity_units()}});
      return true;
    }
    const CacheView view = cache_.view(now_, [this](const Id& id) { return figures(id); });
    VictimPlan plan;
    try {
      plan = select_victims(cfg_.eviction, view, 1, now_, evict_rng_);
    } catch (const InsufficientEvictable&) {
      return false;
    }
    apply_eviction(plan);
    return cache_.occupied_slots() < cache_.capacity_slots();
  }

  void apply_eviction(const VictimPlan& plan) {
    const EvictResult r = cache_.evict(plan, now_);
    for (const auto& rem : r.removed) on_removed(rem, true);
    counters_.entity_evictions += static_cast<std::uint64_t>(r.entity_evictions);
    counters_.attribute_evictions += static_cast<std::uint64_t>(r.attribute_evictions);
    window_entity_evictions_ += static_cast<std::uint64_t>(r.entity_evictions);
    window_attribute_evictions_ += static_cast<std::uint64_t>(r.attribute_evictions);
    json sel = json::array();
    for (const auto& [e, a] : plan.selective_attributes) sel.push_back({e, a});
    log_.add({{"type", "eviction"}, {"rec", rec_}, {"t", now_},
              {"policy", to_string(cfg_.eviction.policy)}, {"mandatory", plan.mandatory_entities},
              {"selective", sel}, {"freed", plan.freed_units}, {"fallback", plan.fallback}});
  }

  void on_removed(const RemovedEntry& rem, bool evicted) {
    const Id& a = rem.entry.item_id;
    stats_.record_cached_lifetime(a, now_ - rem.entry.cached_at);
    reg_.cancel_cl(a);
    if (evicted && rem.premature) ++counters_.premature_evictions;
    if (auto it = active_.find(a); it != active_.end()) {
      Pending& p = pending_.at(it->second);
      if (p.d.action.cache) {
        if (!p.rewarded && agent_) give_reward(p, RewardTrigger::PrematureEviction, false);
        active_.erase(it);
      }
    }
    reg_.take_ret_samples(a);
  }

  void admit(Pending& p, CacheEntry e) {
    const Id& a = p.d.item_id;
    const Id entity = cat_.attribute(a).entity_id;
    if (!ensure_space(entity)) {
      fail_admission(p);
      return;
    }
    e.item_id = a;
    e.entity_id = entity;
    e.expected_cl = p.d.action.cl;
    e.lifetime = cat_.effective_lifetime(a);
    e.provider_id = cat_.primary_provider(a).provider_id;
    const AdmitResult r = cache_.admit(e, now_);
    if (!r.admitted) {
      fail_admission(p);
      return;
    }
    p.admitted = true;
    ++counters_.admissions;
    stats_.mark_cached(a);
    stats_.mark_cached(entity);
    start_residence(p);
    log_.add({{"type", "admission"}, {"rec", rec_}, {"t", now_}, {"id", p.d.id}, {"item", a},
              {"cl", p.d.action.cl}});
  }

  void start_residence(const Pending& p) {
    const Id& a = p.d.item_id;
    const Seconds cl = p.d.action.cl;
    const Seconds expiry = now_ + cl;
    const std::uint64_t token = reg_.schedule_cl(a, expiry, p.d.id);
    push(expiry, EventKind::CLExpiry, a, token);
    const Seconds horizon = cfg_.windows.long_ * cfg_.windows.window_seconds;
    push(now_ + std::min(cl, horizon), EventKind::RewardDue, a, p.d.id);
  }

  // ---- timers -----------------------------------------------------------

  void on_retrieval_complete(const Id& provider, std::uint64_t rid) {
    coalescer_.complete(provider, rid);
    const auto fit = flights_.find(rid);
    if (fit == flights_.end()) return;
    const RetrievalCoalescer::Flight f = fit->second;
    flights_.erase(fit);
    if (!f.failed && cache_.caches()) cache_.refresh_shared(provider, now_, f.latency);

    if (auto db = db_admits_.find(rid); db != db_admits_.end()) {
      for (const auto& a : db->second) {
        db_waiting_.erase(a);
        if (f.failed || cache_.is_cached(a)) continue;
        CacheEntry e;
        e.item_id = a;
        e.entity_id = cat_.attribute(a).entity_id;
        e.last_refreshed_at = now_;
        e.value_age_at_refresh = f.latency;
        e.expected_cl = kInfinite;
        e.lifetime = cat_.effective_lifetime(a);
        e.provider_id = provider;
        if (cache_.admit(e, now_).admitted) {
          ++counters_.admissions;
          stats_.mark_cached(a);
          stats_.mark_cached(e.entity_id);
        }
      }
      db_admits_.erase(db);
    }

    auto fa = flight_admits_.find(rid);
    if (fa == flight_admits_.end()) return;
    const std::vector<std::uint64_t> ids = std::move(fa->second);
    flight_admits_.erase(fa);
    for (std::uint64_t id : ids) {
      Pending& p = pending_.at(id);
      if (p.rewarded || p.admitted) continue;
      if (f.failed) {
        fail_admission(p);
        continue;
      }
      CacheEntry e;
      e.last_refreshed_at = now_;
      e.value_age_at_refresh = f.latency;
      admit(p, e);
    }
  }

  void on_cl_expiry(const Id& a, std::uint64_t token) {
    if (!reg_.timer_current(a, token)) return;
    reg_.cancel_cl(a);
    if (!cache_.is_cached(a)) return;
    Id sla_id = cat_.raw().slas.begin()->first;
    if (auto it = active_.find(a); it != active_.end()) {
      Pending& p = pending_.at(it->second);
      sla_id = p.sla_id;
      if (!p.rewarded) give_reward(p, RewardTrigger::CLElapsed, false);
      active_.erase(it);
    }
    if (!agent_) return;
    Pending& p = decide(a, sla_id);
    if (p.d.action.cache) {
      cache_.extend_cache_life(a, p.d.action.cl, now_);
      p.admitted = true;
      ++counters_.cl_extensions;
      start_residence(p);
    } else {
      const EvictResult r = cache_.remove_attribute(a, now_);
      for (const auto& rem : r.removed) on_removed(rem, false);
      schedule_dt(p);
    }
  }

  void on_reward_due(std::uint64_t id) {
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    Pending& p = it->second;
    if (p.rewarded || !p.admitted) return;
    give_reward(p, RewardTrigger::CLElapsed, false);
  }

  void on_dt_expiry(const Id& a, std::uint64_t token) {
    if (!reg_.timer_current(a, token)) return;
    const auto timer = reg_.dtr(a);
    reg_.cancel_dt(a);
    if (auto it = active_.find(a); it != active_.end() && timer && it->second == timer->decision_id) {
      Pending& p = pending_.at(it->second);
      if (!p.rewarded) give_reward(p, RewardTrigger::DTElapsed, false);
      active_.erase(it);
    }
  }

  void on_ret_list_full(std::uint64_t id) {
    auto it = pending_.find(id);
    if (it == pending_.end() || it->second.rewarded) return;
    give_reward(it->second, RewardTrigger::RetListFull, false);
  }

  void on_window_roll() {
    const std::int64_t w = stats_.current_window();
    log_.add({{"type", "window"}, {"rec", rec_}, {"w", w}, {"retrievals", window_retrievals_},
              {"entity_evictions", window_entity_evictions_},
              {"attribute_evictions", window_attribute_evictions_},
              {"capacity_units", cache_.caches() && cache_.mode() != CacheMode::Database
                                     ? cache_.capacity_units()
                                     : 0},
              {"occupied", cache_.occupied_slots()}});
    window_retrievals_ = window_entity_evictions_ = window_attribute_evictions_ = 0;
    decision_seconds.push_back(window_decision_seconds_);
    window_decision_seconds_ = 0;

    stats_.roll_window(now_);
    if (cfg_.record_item_stats)
      item_rows.insert(item_rows.end(), stats_.last_sealed().begin(), stats_.last_sealed().end());
    if (cache_.mode() == CacheMode::Scalable && cache_.observe_window(cfg_.windows.long_))
      log_.add({{"type", "scale"}, {"rec", rec_}, {"t", now_}, {"units", cache_.capacity_units()}});
    if (cache_.caches()) cache_.purge_ghosts(now_);
    if (agent_) agent_->on_window_roll();
  }

  const SimConfig& cfg_;
  const ValidatedCatalog& cat_;
  Agent* agent_;
  int rec_;
  EventLog& log_;
  StatsTracker stats_;
  CacheEngine cache_;
  RetrievalCoalescer coalescer_;
  Registries reg_;
  Rng latency_rng_, evict_rng_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>> queue_;
  std::uint64_t seq_ = 0;
  Seconds now_ = 0;
  const std::vector<SubQueryInstance>* arrivals_ = nullptr;

  std::map<std::uint64_t, Pending> pending_;
  std::map<Id, std::uint64_t> active_;
  std::map<std::uint64_t, RetrievalCoalescer::Flight> flights_;
  std::map<std::uint64_t, std::vector<std::uint64_t>> flight_admits_;
  std::map<std::uint64_t, std::vector<Id>> db_admits_;
  std::set<Id> db_waiting_;

  RecurrenceCounters counters_;
  std::uint64_t learning_steps_at_start_ = 0;
  std::uint64_t window_retrievals_ = 0;
  std::uint64_t window_entity_evictions_ = 0;
  std::uint64_t window_attribute_evictions_ = 0;
  double window_decision_seconds_ = 0;
};

AgentConfig agent_config_for(const SimConfig& cfg, int rec) {
  AgentConfig a = cfg.agent;
  std::seed_seq ss{cfg.seed, static_cast<std::uint64_t>(rec), std::uint64_t{3}};
  std::array<std::uint32_t, 2> words{};
  ss.generate(words.begin(), words.end());
  a.seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return a;
}

}  // namespace

std::vector<SubQueryInstance> recurrence_arrivals(const SimConfig& cfg, int r) {
  std::seed_seq ss{cfg.seed, static_cast<std::uint64_t>(r), std::uint64_t{0}};
  Rng rng(ss);
  return generate_arrivals(cfg.scenario.workload, rng);
}

RunReport run(const SimConfig& cfg) {
  cfg.validate();
  const ValidatedCatalog cat = validate_catalog(cfg.scenario.catalog);
  validate_workload(cfg.scenario.workload, cat);

  EventLog log;
  log.set_header(config_to_json(cfg), cat.raw().slas, cfg.windows.window_seconds);

  const bool agent_mode = cfg.cache.mode == CacheMode::Limited || cfg.cache.mode == CacheMode::Scalable;
  std::unique_ptr<Agent> agent;
  std::vector<ItemWindowRow> rows;
  std::vector<double> timing;
  for (int r = 0; r < cfg.recurrences; ++r) {
    if (agent_mode) {
      if (!agent || !cfg.share_parameters) {
        auto fresh = make_agent(agent_config_for(cfg, r));
        if (agent && cfg.share_epsilon) {
          fresh->exploration().epsilon = agent->exploration().epsilon;
          fresh->exploration().delta = agent->exploration().delta;
        }
        agent = std::move(fresh);
      } else if (!cfg.share_epsilon) {
        agent->exploration() = cfg.agent.exploration;
      }
    }
    const auto arrivals = recurrence_arrivals(cfg, r);
    Simulation sim(cfg, cat, agent.get(), r, log);
    if (agent) sim.set_learning_baseline(agent->counters().learning_steps);
    sim.run(arrivals);
    rows.insert(rows.end(), sim.item_rows.begin(), sim.item_rows.end());
    timing.insert(timing.end(), sim.decision_seconds.begin(), sim.decision_seconds.end());
  }
  log.close();

  RunReport report = replay(log);
  report.item_rows = std::move(rows);
  report.decision_seconds = std::move(timing);
  return report;
}

RunReport replay(const EventLog& log, const std::map<Id, ConsumerSla>* sla_override) {
  const std::map<Id, ConsumerSla> book = sla_override ? *sla_override : log.sla_book();
  const Seconds W = log.window_seconds();

  struct Rec {
    std::map<std::int64_t, std::vector<AccessOutcome>> by_window;
    std::vector<std::pair<std::int64_t, WindowCounters>> windows;
    std::vector<AccessOutcome> outcomes;
    RecurrenceCounters counters;
  };
  std::map<int, Rec> recs;
  for (const auto& j : log.records()) {
    const std::string type = j.at("type").get<std::string>();
    const int rec = j.value("rec", 0);
    if (type == "query") {
      AccessOutcome o = outcome_from_json(j);
      auto s = book.find(o.sla_id);
      if (s == book.end()) throw std::invalid_argument("SLA book has no entry for " + o.sla_id);
      if (sla_override) o.delayed = o.response_time > s->second.rt_max;
      recs[rec].by_window[o.window_index].push_back(o);
      recs[rec].outcomes.push_back(std::move(o));
    } else if (type == "window") {
      WindowCounters c;
      c.retrieval_count = j.at("retrievals");
      c.entity_evictions = j.at("entity_evictions");
      c.attribute_evictions = j.at("attribute_evictions");
      c.capacity_units = j.at("capacity_units");
      c.occupied_entities = j.at("occupied");
      recs[rec].windows.emplace_back(j.at("w").get<std::int64_t>(), c);
    } else if (type == "recurrence") {
      recs[rec].counters = counters_from_json(j.at("counters"));
    }
  }

  RunReport report;
  for (auto& [idx, r] : recs) {
    RecurrenceReport rr;
    rr.index = idx;
    for (const auto& [w, c] : r.windows) {
      static const std::vector<AccessOutcome> none;
      auto it = r.by_window.find(w);
      rr.windows.push_back(window_metrics(w, it == r.by_window.end() ? none : it->second, c, book, W));
    }
    rr.totals = total_return(r.outcomes, book);
    rr.outcomes = std::move(r.outcomes);
    rr.counters = r.counters;
    report.totals.parts += rr.totals.parts;
    report.totals.queries += rr.totals.queries;
    report.recurrences.push_back(std::move(rr));
  }
  report.log = log;
  report.summary_json = summary_json(report, log.header().contains("config") ? log.header()["config"].dump() : "{}");
  return report;
}

void write_windows_csv(std::ostream& os, const RunReport& report) {
  os << "recurrence,window,queries,mean_rt,hr,pd,throughput,cache_throughput,retrievals,"
        "entity_evictions,attribute_evictions,pessi_ret,mean_ret,earnings,penalties,"
        "retrieval_cost,total_return,capacity_units,occupied_entities,empty\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& r : report.recurrences)
    for (const auto& w : r.windows)
      os << r.index << ',' << w.window_index << ',' << w.queries << ',' << num(w.mean_rt) << ','
         << num(w.hr) << ',' << num(w.pd) << ',' << num(w.throughput) << ','
         << num(w.cache_throughput) << ',' << w.retrieval_count << ',' << w.entity_evictions << ','
         << w.attribute_evictions << ',' << num(w.pessi_ret) << ',' << num(w.mean_ret) << ','
         << num(w.parts.earnings.value()) << ',' << num(w.parts.penalties.value()) << ','
         << num(w.parts.retrieval_cost.value()) << ',' << num(w.parts.total().value()) << ','
         << w.capacity_units << ',' << w.occupied_entities << ',' << (w.empty ? 1 : 0) << '\n';
}

void write_timing_csv(std::ostream& os, const RunReport& report) {
  os << "window,decision_seconds\n";
  for (std::size_t i = 0; i < report.decision_seconds.size(); ++i)
    os << i << ',' << report.decision_seconds[i] << '\n';
}

namespace {

json parts_json(const ReturnParts& p) {
  return {{"earnings", p.earnings.value()},
          {"penalties", p.penalties.value()},
          {"retrieval_cost", p.retrieval_cost.value()},
          {"earnings_net_of_penalties", (p.earnings - p.penalties).value()},
          {"total_return", p.total().value()}};
}

struct Aggregate {
  double rt_sum = 0;
  std::uint64_t queries = 0, delayed = 0, acc = 0, fresh = 0;
  void add(const AccessOutcome& o) {
    rt_sum += o.response_time;
    ++queries;
    delayed += o.delayed;
    acc += static_cast<std::uint64_t>(o.attribute_accesses);
    fresh += static_cast<std::uint64_t>(o.fresh_attribute_hits);
  }
  json to_json() const {
    return {{"queries", queries},
            {"mean_rt", queries ? rt_sum / static_cast<double>(queries) : 0.0},
            {"hr", acc ? static_cast<double>(fresh) / static_cast<double>(acc) : 0.0},
            {"pd", queries ? static_cast<double>(delayed) / static_cast<double>(queries) : 0.0}};
  }
};

}  // namespace

std::string summary_json(const RunReport& report, const std::string& config_echo) {
  json s;
  s["format"] = "acoca-summary";
  s["version"] = 1;
  Aggregate all;
  json recs = json::array();
  for (const auto& r : report.recurrences) {
    Aggregate a;
    for (const auto& o : r.outcomes) {
      a.add(o);
      all.add(o);
    }
    json j = a.to_json();
    j["index"] = r.index;
    j.update(parts_json(r.totals.parts));
    j["counters"] = counters_to_json(r.counters);
    recs.push_back(std::move(j));
  }
  s.update(all.to_json());
  s.update(parts_json(report.totals.parts));
  s["recurrences"] = std::move(recs);
  json cfg = json::parse(config_echo.empty() ? "{}" : config_echo, nullptr, false);
  s["config"] = cfg.is_discarded() ? json::object() : cfg;
  return s.dump(2);
}

}  // namespace acoca
