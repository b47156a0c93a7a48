#include "acoca/economics.hpp"

#include <algorithm>
#include <set>

namespace acoca {

ReturnParts& ReturnParts::operator+=(const ReturnParts& o) {
  earnings += o.earnings;
  penalties += o.penalties;
  retrieval_cost += o.retrieval_cost;
  return *this;
}

ReturnParts price_outcome(const AccessOutcome& o, const ConsumerSla& sla) {
  ReturnParts p;
  if (o.valid) p.earnings = sla.price_per_response;
  else p.penalties += sla.invalid_penalty;
  if (o.delayed) p.penalties += sla.delay_penalty;
  p.retrieval_cost = o.retrieval_costs_charged;
  return p;
}

Money per_access_return(const AccessOutcome& o, const ConsumerSla& sla) {
  return price_outcome(o, sla).total();
}

Money reprice(const AccessOutcome& o, const ConsumerSla& sla) {
  AccessOutcome r = o;
  r.delayed = o.response_time > sla.rt_max;
  return per_access_return(r, sla);
}

Money expected_cached_return(const ConsumerSla& sla, double expected_hit_rate, Money refresh_cost) {
  const double miss = 1.0 - std::clamp(expected_hit_rate, 0.0, 1.0);
  return sla.price_per_response - Money::from_double(sla.delay_penalty.value() * miss) -
         Money::from_double(refresh_cost.value() * miss);
}

ConsumerSla pessimistic_sla(const std::vector<const ConsumerSla*>& slas) {
  ConsumerSla w;
  w.sla_id = "pessimistic";
  if (slas.empty()) return w;
  w = *slas.front();
  w.sla_id = "pessimistic";
  for (const auto* s : slas) {
    w.price_per_response = std::min(w.price_per_response, s->price_per_response);
    w.delay_penalty = std::max(w.delay_penalty, s->delay_penalty);
    w.invalid_penalty = std::max(w.invalid_penalty, s->invalid_penalty);
    w.rt_max = std::min(w.rt_max, s->rt_max);
    w.freshness_threshold = std::max(w.freshness_threshold, s->freshness_threshold);
  }
  return w;
}

PessiRet pessi_ret(const std::vector<AccessOutcome>& window, const std::map<Id, ConsumerSla>& book) {
  PessiRet r;
  if (window.empty()) return r;
  std::set<Id> used;
  for (const auto& o : window) used.insert(o.sla_id);
  std::vector<const ConsumerSla*> slas;
  for (const auto& id : used) slas.push_back(&book.at(id));
  const ConsumerSla worst = pessimistic_sla(slas);
  Money sum;
  for (const auto& o : window) sum += reprice(o, worst);
  r.value = sum.value() / static_cast<double>(window.size());
  r.empty = false;
  return r;
}

WindowMetrics window_metrics(std::int64_t window_index, const std::vector<AccessOutcome>& window,
                             const WindowCounters& c, const std::map<Id, ConsumerSla>& book,
                             Seconds window_seconds) {
  WindowMetrics m;
  m.window_index = window_index;
  m.retrieval_count = c.retrieval_count;
  m.entity_evictions = c.entity_evictions;
  m.attribute_evictions = c.attribute_evictions;
  m.capacity_units = c.capacity_units;
  m.occupied_entities = c.occupied_entities;
  m.queries = window.size();
  if (window.empty()) return m;
  m.empty = false;
  double rt = 0;
  std::uint64_t delayed = 0, cache_served = 0, accesses = 0, hits = 0;
  for (const auto& o : window) {
    rt += o.response_time;
    delayed += o.delayed;
    cache_served += o.hit_kind == HitKind::Complete;
    accesses += static_cast<std::uint64_t>(o.attribute_accesses);
    hits += static_cast<std::uint64_t>(o.fresh_attribute_hits);
    m.parts += price_outcome(o, book.at(o.sla_id));
  }
  const double n = static_cast<double>(window.size());
  m.mean_rt = rt / n;
  m.pd = static_cast<double>(delayed) / n;
  m.hr = accesses ? static_cast<double>(hits) / static_cast<double>(accesses) : 0.0;
  m.throughput = n / window_seconds;
  m.cache_throughput = static_cast<double>(cache_served) / window_seconds;
  m.mean_ret = m.parts.total().value() / n;
  m.pessi_ret = pessi_ret(window, book).value;
  return m;
}

TotalReturn total_return(const std::vector<AccessOutcome>& outcomes,
                         const std::map<Id, ConsumerSla>& book) {
  TotalReturn t;
  for (const auto& o : outcomes) t.parts += price_outcome(o, book.at(o.sla_id));
  t.queries = outcomes.size();
  return t;
}

}  // namespace acoca
