#pragma once

#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "acoca/core_model.hpp"

namespace acoca {

using Rng = std::mt19937_64;

struct SubQueryTemplate {
  Id template_id;
  std::set<Id> entity_ids;
  std::set<Id> attribute_ids;
  Id sla_id;
  double weight = 1.0;
};

struct SpikeInterval {
  Seconds start = 0;
  Seconds end = 0;
  double multiplier = 1.0;
};

struct WorkloadSpec {
  double lambda_rate = 2.5;
  Seconds duration = 600;
  std::vector<SubQueryTemplate> templates;
  std::vector<SpikeInterval> spike_schedule;
  std::uint64_t seed = 1;
  Seconds latency_floor = 0.001;
};

struct SubQueryInstance {
  Seconds arrival_time = 0;
  std::size_t template_index = 0;
  Id template_id;
  Id sla_id;
};

// Throws std::invalid_argument on the first structural problem; checks
// template references against the catalog.
void validate_workload(const WorkloadSpec& spec, const ValidatedCatalog& catalog);

// Rate in effect at time t (lambda times the multiplier of the covering spike).
double rate_at(const WorkloadSpec& spec, Seconds t);

// Piecewise-homogeneous Poisson process over [0, duration], sorted by time.
std::vector<SubQueryInstance> generate_arrivals(const WorkloadSpec& spec, Rng& rng);

// Normal(mean, var) truncated below at `floor`.
Seconds sample_provider_latency(const ContextProvider& provider, Rng& rng, Seconds floor = 0.001);

void write_arrivals_csv(std::ostream& os, const std::vector<SubQueryInstance>& arrivals);

struct Scenario {
  ContextCatalog catalog;
  WorkloadSpec workload;
};

// Eight entities, 25 providers, eight SLAs and twelve sub-query templates
// around a city intersection: car parks, weather, bikes, cars, a park.
Scenario bundled_scenario();

// Bundled catalog with `unique_count` distinct templates obtained by
// enumerating attribute subsets and SLA bindings of the base templates.
Scenario expanded_scenario(std::size_t unique_count);

}  // namespace acoca
