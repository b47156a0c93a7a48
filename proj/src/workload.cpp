#include "acoca/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace acoca {

void validate_workload(const WorkloadSpec& spec, const ValidatedCatalog& catalog) {
  if (!(spec.lambda_rate > 0)) throw std::invalid_argument("workload.lambda_rate must be > 0");
  if (!(spec.duration >= 0)) throw std::invalid_argument("workload.duration must be >= 0");
  if (spec.templates.empty()) throw std::invalid_argument("workload.templates must be non-empty");
  double total = 0;
  for (const auto& t : spec.templates) {
    if (!(t.weight >= 0)) throw std::invalid_argument("template weight must be >= 0: " + t.template_id);
    total += t.weight;
    if (t.entity_ids.empty() || t.attribute_ids.empty())
      throw std::invalid_argument("template needs entities and attributes: " + t.template_id);
    if (!catalog.raw().slas.contains(t.sla_id))
      throw std::invalid_argument("template references unknown sla: " + t.sla_id);
    std::set<Id> allowed;
    for (const auto& e : t.entity_ids) {
      if (!catalog.raw().entities.contains(e))
        throw std::invalid_argument("template references unknown entity: " + e);
      const auto& ent = catalog.entity(e);
      allowed.insert(ent.attribute_ids.begin(), ent.attribute_ids.end());
    }
    for (const auto& a : t.attribute_ids)
      if (!allowed.contains(a))
        throw std::invalid_argument("template attribute outside its entities: " + a);
  }
  if (!(total > 0)) throw std::invalid_argument("template weights are all zero");
  for (const auto& s : spec.spike_schedule) {
    if (!(s.multiplier >= 1)) throw std::invalid_argument("spike multiplier must be >= 1");
    if (!(s.end >= s.start)) throw std::invalid_argument("spike interval end before start");
  }
  if (!(spec.latency_floor >= 0)) throw std::invalid_argument("latency_floor must be >= 0");
}

double rate_at(const WorkloadSpec& spec, Seconds t) {
  double m = 1.0;
  for (const auto& s : spec.spike_schedule)
    if (t >= s.start && t < s.end) m = std::max(m, s.multiplier);
  return spec.lambda_rate * m;
}

std::vector<SubQueryInstance> generate_arrivals(const WorkloadSpec& spec, Rng& rng) {
  std::vector<SubQueryInstance> out;
  if (spec.duration <= 0 || spec.templates.empty()) return out;

  std::vector<double> weights;
  weights.reserve(spec.templates.size());
  for (const auto& t : spec.templates) weights.push_back(t.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  // Rate changes only at spike boundaries; the process restarts there, which is
  // exact for a Poisson process because of memorylessness.
  std::vector<Seconds> boundaries;
  for (const auto& s : spec.spike_schedule) {
    if (s.start > 0 && s.start < spec.duration) boundaries.push_back(s.start);
    if (s.end > 0 && s.end < spec.duration) boundaries.push_back(s.end);
  }
  boundaries.push_back(spec.duration);
  std::sort(boundaries.begin(), boundaries.end());

  Seconds t = 0;
  while (t < spec.duration) {
    const double rate = rate_at(spec, t);
    const Seconds next_boundary = *std::upper_bound(boundaries.begin(), boundaries.end(), t);
    std::exponential_distribution<double> gap(rate);
    const Seconds candidate = t + gap(rng);
    if (candidate >= next_boundary) {
      t = next_boundary;
      continue;
    }
    t = candidate;
    const std::size_t idx = pick(rng);
    out.push_back({t, idx, spec.templates[idx].template_id, spec.templates[idx].sla_id});
  }
  return out;
}

Seconds sample_provider_latency(const ContextProvider& p, Rng& rng, Seconds floor) {
  if (p.latency_var <= 0) return std::max(p.latency_mean, floor);
  std::normal_distribution<double> d(p.latency_mean, std::sqrt(p.latency_var));
  return std::max(d(rng), floor);
}

void write_arrivals_csv(std::ostream& os, const std::vector<SubQueryInstance>& arrivals) {
  os << "arrival_time,template_id,sla_id\n";
  char buf[64];
  for (const auto& a : arrivals) {
    std::snprintf(buf, sizeof buf, "%.6f", a.arrival_time);
    os << buf << ',' << a.template_id << ',' << a.sla_id << '\n';
  }
}

}  // namespace acoca
