#pragma once

#include <string>
#include <vector>

#include "acoca/core_model.hpp"
#include "acoca/sim.hpp"

namespace acoca::test {

// One entity "e" with attributes a1..an, one provider per attribute and a
// single SLA "s".
inline ContextCatalog small_catalog(int attributes = 2, Seconds latency = 1.0, double var = 0.0,
                                    Seconds lifetime = 100.0, double cost = 0.1) {
  ContextCatalog c;
  ContextEntity e{"e", {}};
  for (int i = 1; i <= attributes; ++i) {
    const std::string a = "a" + std::to_string(i), p = "p" + std::to_string(i);
    c.providers[p] = ContextProvider{p, latency, var, 1000.0, Money::from_double(cost), 1.0};
    c.attributes[a] = ContextAttribute{a, "e", {p}, lifetime};
    e.attribute_ids.insert(a);
  }
  c.entities["e"] = e;
  c.slas["s"] = ConsumerSla{"s", Money::from_double(1.0), 0.5, Money::from_double(0.5),
                            Money::from_double(0.8), 1.5};
  return c;
}

inline SubQueryTemplate template_of(const ContextCatalog& c, const std::string& id,
                                    std::vector<std::string> attrs, const std::string& sla = "s",
                                    double weight = 1.0) {
  SubQueryTemplate t;
  t.template_id = id;
  t.sla_id = sla;
  t.weight = weight;
  for (auto& a : attrs) {
    t.attribute_ids.insert(a);
    t.entity_ids.insert(c.attributes.at(a).entity_id);
  }
  return t;
}

// Small, fast configuration over the bundled scenario.
inline SimConfig quick_config(CacheMode mode, AgentKind kind = AgentKind::StatBaseline,
                              Seconds duration = 120) {
  SimConfig c;
  c.scenario = bundled_scenario();
  c.scenario.workload.duration = duration;
  c.cache.mode = mode;
  c.agent.kind = kind;
  c.agent.hidden = {16, 8};
  return c;
}

}  // namespace acoca::test
