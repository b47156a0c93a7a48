#include "acoca/core_model.hpp"

#include <algorithm>
#include <sstream>

namespace acoca {

std::string CatalogViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::DanglingReference: os << "DanglingReference(" << field << ", " << id << ")"; break;
    case Kind::NonPositiveField: os << "NonPositiveField(" << field << ", " << id << ")"; break;
    case Kind::OutOfRange: os << "OutOfRange(" << field << ", " << id << ")"; break;
    case Kind::Empty: os << "Empty(" << field << ", " << id << ")"; break;
  }
  return os.str();
}

namespace {

std::string join_violations(const std::vector<CatalogViolation>& v) {
  std::string out = "invalid catalog:";
  for (const auto& x : v) out += " " + x.describe() + ";";
  return out;
}

}  // namespace

CatalogError::CatalogError(std::vector<CatalogViolation> v)
    : std::runtime_error(join_violations(v)), violations_(std::move(v)) {}

std::vector<CatalogViolation> check_catalog(const ContextCatalog& c) {
  using K = CatalogViolation::Kind;
  std::vector<CatalogViolation> out;
  auto add = [&](K k, std::string f, const Id& id) { out.push_back({k, std::move(f), id}); };

  for (const auto& [pid, p] : c.providers) {
    if (pid != p.provider_id) add(K::DanglingReference, "provider_key", pid);
    if (!(p.latency_mean > 0)) add(K::NonPositiveField, "latency_mean", pid);
    if (!(p.latency_var >= 0)) add(K::NonPositiveField, "latency_var", pid);
    if (!(p.sampling_rate > 0)) add(K::NonPositiveField, "sampling_rate", pid);
    if (p.cost_per_retrieval < Money{}) add(K::NonPositiveField, "cost_per_retrieval", pid);
    if (!(p.availability >= 0 && p.availability <= 1)) add(K::OutOfRange, "availability", pid);
  }
  for (const auto& [aid, a] : c.attributes) {
    if (aid != a.attr_id) add(K::DanglingReference, "attribute_key", aid);
    if (!c.entities.contains(a.entity_id)) add(K::DanglingReference, "entity", a.entity_id);
    if (a.provider_ids.empty()) add(K::Empty, "provider_ids", aid);
    for (const auto& pid : a.provider_ids)
      if (!c.providers.contains(pid)) add(K::DanglingReference, "provider", pid);
    if (!is_infinite(a.lifetime) && !(a.lifetime > 0)) add(K::NonPositiveField, "lifetime", aid);
  }
  for (const auto& [eid, e] : c.entities) {
    if (eid != e.entity_id) add(K::DanglingReference, "entity_key", eid);
    if (e.attribute_ids.empty()) add(K::Empty, "attribute_ids", eid);
    for (const auto& aid : e.attribute_ids)
      if (!c.attributes.contains(aid)) add(K::DanglingReference, "attribute", aid);
  }
  for (const auto& [sid, s] : c.slas) {
    if (sid != s.sla_id) add(K::DanglingReference, "sla_key", sid);
    if (!(s.freshness_threshold >= 0 && s.freshness_threshold < 1))
      add(K::OutOfRange, "freshness_threshold", sid);
    if (!(s.rt_max > 0)) add(K::NonPositiveField, "rt_max", sid);
    if (s.price_per_response < Money{}) add(K::NonPositiveField, "price_per_response", sid);
    if (s.delay_penalty < Money{}) add(K::NonPositiveField, "delay_penalty", sid);
    if (s.invalid_penalty < Money{}) add(K::NonPositiveField, "invalid_penalty", sid);
  }
  return out;
}

ValidatedCatalog validate_catalog(ContextCatalog raw) {
  auto v = check_catalog(raw);
  if (!v.empty()) throw CatalogError(std::move(v));
  return ValidatedCatalog(std::move(raw));
}

namespace {
template <class M>
const auto& lookup_or_throw(const M& m, const Id& id, const char* what) {
  auto it = m.find(id);
  if (it == m.end()) throw std::out_of_range(std::string("unknown ") + what + ": " + id);
  return it->second;
}
}  // namespace

const ContextAttribute& ValidatedCatalog::attribute(const Id& id) const {
  return lookup_or_throw(catalog_.attributes, id, "attribute");
}
const ContextEntity& ValidatedCatalog::entity(const Id& id) const {
  return lookup_or_throw(catalog_.entities, id, "entity");
}
const ContextProvider& ValidatedCatalog::provider(const Id& id) const {
  return lookup_or_throw(catalog_.providers, id, "provider");
}
const ConsumerSla& ValidatedCatalog::sla(const Id& id) const {
  return lookup_or_throw(catalog_.slas, id, "sla");
}

const ContextProvider& ValidatedCatalog::primary_provider(const Id& attr_id) const {
  const auto& a = attribute(attr_id);
  const ContextProvider* best = nullptr;
  for (const auto& pid : a.provider_ids) {
    const auto& p = provider(pid);
    if (!best || p.latency_mean < best->latency_mean ||
        (p.latency_mean == best->latency_mean && p.provider_id < best->provider_id))
      best = &p;
  }
  return *best;
}

Seconds ValidatedCatalog::effective_lifetime(const Id& attr_id) const {
  const auto& a = attribute(attr_id);
  const auto& p = primary_provider(attr_id);
  return std::max(1.0 / p.sampling_rate, a.lifetime);
}

double ValidatedCatalog::min_freshness_threshold() const {
  double m = 1.0;
  for (const auto& [_, s] : catalog_.slas) m = std::min(m, s.freshness_threshold);
  return catalog_.slas.empty() ? 0.0 : m;
}

Money ValidatedCatalog::max_retrieval_cost() const {
  Money m;
  for (const auto& [_, p] : catalog_.providers) m = std::max(m, p.cost_per_retrieval);
  return m;
}

Seconds ValidatedCatalog::max_rt_max() const {
  Seconds m = 0;
  for (const auto& [_, s] : catalog_.slas) m = std::max(m, s.rt_max);
  return m;
}

double arrival_freshness(Seconds latency, Seconds lifetime) {
  if (is_infinite(lifetime)) return 1.0;
  return std::clamp(1.0 - latency / lifetime, 0.0, 1.0);
}

Seconds residual_lifetime(double f_arrive, double f_thresh, Seconds latency) {
  if (f_arrive >= 1.0) return kInfinite;
  return (f_arrive - f_thresh) * latency / (1.0 - f_arrive);
}

double freshness_at(Seconds age, Seconds lifetime) {
  if (is_infinite(lifetime)) return 1.0;
  return std::clamp(1.0 - age / lifetime, 0.0, 1.0);
}

}  // namespace acoca
