#include "acoca/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace acoca {

using nlohmann::json;

const char* to_string(ConfigError::Code c) {
  switch (c) {
    case ConfigError::Code::Io: return "IO";
    case ConfigError::Code::Parse: return "PARSE";
    case ConfigError::Code::UnknownKey: return "UNKNOWN_KEY";
    case ConfigError::Code::Range: return "RANGE";
  }
  return "PARSE";
}

namespace {

[[noreturn]] void range_error(const std::string& field, const std::string& msg) {
  throw ConfigError(ConfigError::Code::Range, field, field + ": " + msg);
}

// Reads an object while remembering which keys were used; finish() rejects
// the rest.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) range_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        if constexpr (std::is_integral_v<T>) {
          if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
          if constexpr (std::is_unsigned_v<T>)
            if (v.is_number_integer() && v.get<std::int64_t>() < 0 && !v.is_number_unsigned())
              throw std::invalid_argument("expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::invalid_argument& e) {
      range_error(field(key), e.what());
    } catch (const json::exception& e) {
      range_error(field(key), "wrong type");
    }
  }

  void read_seconds(const std::string& key, Seconds& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (v.is_string() && v.get<std::string>() == "inf") {
      out = kInfinite;
      return;
    }
    if (!v.is_number()) range_error(field(key), "expected a number or \"inf\"");
    out = v.get<double>();
  }

  void read_money(const std::string& key, Money& out) {
    double d = out.value();
    read(key, d);
    out = Money::from_double(d);
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!used_.contains(k)) {
        const std::string f = field(k);
        throw ConfigError(ConfigError::Code::UnknownKey, f, "unknown key: " + f);
      }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json seconds_json(Seconds s) { return is_infinite(s) ? json("inf") : json(s); }

const json& array_at(Reader& r, const std::string& key) {
  const json& a = r.raw(key);
  if (!a.is_array()) range_error(r.field(key), "expected an array");
  return a;
}

std::vector<Id> id_list(Reader& r, const std::string& key) {
  std::vector<Id> out;
  for (const auto& x : array_at(r, key)) {
    if (!x.is_string()) range_error(r.field(key), "expected strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

ContextCatalog catalog_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  ContextCatalog c;
  if (r.has("providers")) {
    int i = 0;
    for (const auto& pj : array_at(r, "providers")) {
      Reader pr(pj, r.field("providers") + "[" + std::to_string(i++) + "]");
      ContextProvider p;
      pr.read("id", p.provider_id);
      pr.read("latency_mean", p.latency_mean);
      pr.read("latency_var", p.latency_var);
      pr.read("sampling_rate", p.sampling_rate);
      pr.read_money("cost", p.cost_per_retrieval);
      pr.read("availability", p.availability);
      pr.finish();
      c.providers[p.provider_id] = p;
    }
  }
  if (r.has("attributes")) {
    int i = 0;
    for (const auto& aj : array_at(r, "attributes")) {
      Reader ar(aj, r.field("attributes") + "[" + std::to_string(i++) + "]");
      ContextAttribute a;
      ar.read("id", a.attr_id);
      ar.read("entity", a.entity_id);
      if (ar.has("providers")) a.provider_ids = id_list(ar, "providers");
      ar.read_seconds("lifetime", a.lifetime);
      ar.finish();
      c.attributes[a.attr_id] = a;
    }
  }
  if (r.has("slas")) {
    int i = 0;
    for (const auto& sj : array_at(r, "slas")) {
      Reader sr(sj, r.field("slas") + "[" + std::to_string(i++) + "]");
      ConsumerSla s;
      sr.read("id", s.sla_id);
      sr.read_money("price", s.price_per_response);
      sr.read("freshness_threshold", s.freshness_threshold);
      sr.read_money("delay_penalty", s.delay_penalty);
      sr.read_money("invalid_penalty", s.invalid_penalty);
      sr.read_seconds("rt_max", s.rt_max);
      sr.finish();
      c.slas[s.sla_id] = s;
    }
  }
  r.finish();
  for (const auto& [id, a] : c.attributes) {
    auto& e = c.entities[a.entity_id];
    e.entity_id = a.entity_id;
    e.attribute_ids.insert(id);
  }
  return c;
}

json catalog_to_json(const ContextCatalog& c) {
  json providers = json::array(), attributes = json::array(), slas = json::array();
  for (const auto& [_, p] : c.providers)
    providers.push_back({{"id", p.provider_id},
                         {"latency_mean", p.latency_mean},
                         {"latency_var", p.latency_var},
                         {"sampling_rate", p.sampling_rate},
                         {"cost", p.cost_per_retrieval.value()},
                         {"availability", p.availability}});
  for (const auto& [_, a] : c.attributes)
    attributes.push_back({{"id", a.attr_id},
                          {"entity", a.entity_id},
                          {"providers", a.provider_ids},
                          {"lifetime", seconds_json(a.lifetime)}});
  for (const auto& [_, s] : c.slas)
    slas.push_back({{"id", s.sla_id},
                    {"price", s.price_per_response.value()},
                    {"freshness_threshold", s.freshness_threshold},
                    {"delay_penalty", s.delay_penalty.value()},
                    {"invalid_penalty", s.invalid_penalty.value()},
                    {"rt_max", seconds_json(s.rt_max)}});
  return {{"providers", providers}, {"attributes", attributes}, {"slas", slas}};
}

void workload_from_json(const json& j, const std::string& path, WorkloadSpec& w,
                        const ContextCatalog& catalog) {
  Reader r(j, path);
  r.read("lambda_rate", w.lambda_rate);
  r.read("duration", w.duration);
  r.read("latency_floor", w.latency_floor);
  if (r.has("templates")) {
    w.templates.clear();
    int i = 0;
    for (const auto& tj : array_at(r, "templates")) {
      Reader tr(tj, r.field("templates") + "[" + std::to_string(i++) + "]");
      SubQueryTemplate t;
      tr.read("id", t.template_id);
      if (tr.has("attributes")) {
        const auto ids = id_list(tr, "attributes");
        t.attribute_ids.insert(ids.begin(), ids.end());
      }
      tr.read("sla", t.sla_id);
      tr.read("weight", t.weight);
      tr.finish();
      for (const auto& a : t.attribute_ids)
        if (auto it = catalog.attributes.find(a); it != catalog.attributes.end())
          t.entity_ids.insert(it->second.entity_id);
      w.templates.push_back(std::move(t));
    }
  }
  if (r.has("spike_schedule")) {
    w.spike_schedule.clear();
    int i = 0;
    for (const auto& sj : array_at(r, "spike_schedule")) {
      Reader sr(sj, r.field("spike_schedule") + "[" + std::to_string(i++) + "]");
      SpikeInterval s;
      sr.read("start", s.start);
      sr.read("end", s.end);
      sr.read("multiplier", s.multiplier);
      sr.finish();
      w.spike_schedule.push_back(s);
    }
  }
  r.finish();
}

json workload_to_json(const WorkloadSpec& w) {
  json templates = json::array(), spikes = json::array();
  for (const auto& t : w.templates)
    templates.push_back({{"id", t.template_id},
                         {"attributes", std::vector<Id>(t.attribute_ids.begin(), t.attribute_ids.end())},
                         {"sla", t.sla_id},
                         {"weight", t.weight}});
  for (const auto& s : w.spike_schedule)
    spikes.push_back({{"start", s.start}, {"end", s.end}, {"multiplier", s.multiplier}});
  return {{"lambda_rate", w.lambda_rate},
          {"duration", w.duration},
          {"latency_floor", w.latency_floor},
          {"templates", templates},
          {"spike_schedule", spikes}};
}

template <class E, class F>
E enum_field(Reader& r, const std::string& key, E current, F parse) {
  std::string s;
  r.read(key, s);
  if (s.empty()) return current;
  try {
    return parse(s);
  } catch (const std::invalid_argument& e) {
    range_error(r.field(key), e.what());
  }
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    const std::string where = std::to_string(line) + ":" + std::to_string(col);
    throw ConfigError(ConfigError::Code::Parse, where, "JSON parse error at " + where);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(ConfigError::Code::Io, path, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  std::string preset = "bundled";
  r.read("preset", preset);
  std::size_t unique = 12;
  r.read("unique_count", unique);
  Scenario s;
  if (preset == "bundled") {
    s = bundled_scenario();
  } else if (preset == "expanded") {
    if (unique < 1) range_error(r.field("unique_count"), "must be >= 1");
    try {
      s = expanded_scenario(unique);
    } catch (const std::invalid_argument& e) {
      range_error(r.field("unique_count"), e.what());
    }
  } else if (preset == "custom") {
    s = Scenario{};
  } else {
    range_error(r.field("preset"), "expected bundled, expanded or custom");
  }
  if (r.has("catalog")) s.catalog = catalog_from_json(r.raw("catalog"), r.field("catalog"));
  if (r.has("workload")) workload_from_json(r.raw("workload"), r.field("workload"), s.workload, s.catalog);
  r.finish();
  return s;
}

json scenario_to_json(const Scenario& s) {
  return {{"preset", "custom"},
          {"catalog", catalog_to_json(s.catalog)},
          {"workload", workload_to_json(s.workload)}};
}

SimConfig config_from_json(const json& j) {
  Reader r(j, "");
  SimConfig c;
  c.scenario = bundled_scenario();
  r.read("seed", c.seed);
  r.read("recurrences", c.recurrences);
  r.read("share_parameters", c.share_parameters);
  r.read("share_epsilon", c.share_epsilon);
  r.read("cache_seek_seconds", c.cache_seek_seconds);
  r.read("spike_factor", c.spike_factor);
  r.read("ret_list_cap", c.ret_list_cap);
  r.read("record_item_stats", c.record_item_stats);
  c.cache.mode = enum_field(r, "mode", c.cache.mode, cache_mode_from_string);
  if (r.has("compare")) r.raw("compare");  // consumed by parse_compare

  if (r.has("cache")) {
    Reader cr(r.raw("cache"), "cache");
    cr.read("capacity_units", c.cache.capacity_units);
    cr.read("max_units", c.cache.max_units);
    cr.read("unit_size_entities", c.cache.unit_size_entities);
    cr.read("shrink_threshold", c.cache.shrink_threshold);
    cr.finish();
  }
  if (r.has("agent")) {
    Reader ar(r.raw("agent"), "agent");
    AgentConfig& a = c.agent;
    a.kind = enum_field(ar, "kind", a.kind, agent_kind_from_string);
    ar.read("gamma", a.gamma);
    ar.read("alpha", a.alpha);
    ar.read("beta", a.beta);
    ar.read("tau", a.tau);
    ar.read("theta_batch", a.theta_batch);
    ar.read("cycle_learn", a.cycle_learn);
    ar.read("replay_capacity", a.replay_capacity);
    ar.read("mfu_candidates", a.mfu_candidates);
    if (ar.has("hidden")) {
      const json& h = array_at(ar, "hidden");
      a.hidden.clear();
      for (const auto& x : h) {
        if (!x.is_number_integer()) range_error("agent.hidden", "expected integers");
        a.hidden.push_back(x.get<int>());
      }
    }
    if (ar.has("feature_scales")) {
      Reader fr(ar.raw("feature_scales"), "agent.feature_scales");
      fr.read("cached_lifetime", a.scales.cached_lifetime);
      fr.read("retrieval_latency", a.scales.retrieval_latency);
      fr.read("retrieval_cost", a.scales.retrieval_cost);
      fr.finish();
    }
    if (ar.has("exploration")) {
      Reader er(ar.raw("exploration"), "agent.exploration");
      ExplorationState& e = a.exploration;
      er.read("enabled", a.exploration_enabled);
      er.read("epsilon", e.epsilon);
      er.read("zeta", e.zeta);
      er.read("epsilon_min", e.epsilon_min);
      er.read("epsilon_max", e.epsilon_max);
      er.read("reward_threshold", e.reward_threshold);
      er.read("delta", e.delta);
      er.read("omega", e.omega);
      er.finish();
    }
    ar.finish();
  }
  if (r.has("eviction")) {
    Reader er(r.raw("eviction"), "eviction");
    c.eviction.policy = enum_field(er, "policy", c.eviction.policy, eviction_policy_from_string);
    er.read("eta", c.eviction.eta);
    er.read("kappa", c.eviction.weights.kappa);
    er.read("mu", c.eviction.weights.mu);
    er.read("nu", c.eviction.weights.nu);
    er.finish();
  }
  if (r.has("windows")) {
    Reader wr(r.raw("windows"), "windows");
    wr.read("window_seconds", c.windows.window_seconds);
    wr.read("short", c.windows.short_);
    wr.read("mid", c.windows.mid);
    wr.read("long", c.windows.long_);
    wr.finish();
  }
  if (r.has("scenario")) c.scenario = scenario_from_json(r.raw("scenario"), "scenario");
  r.finish();
  c.scenario.workload.seed = c.seed;
  c.validate();
  return c;
}

json config_to_json(const SimConfig& c) {
  const AgentConfig& a = c.agent;
  const ExplorationState& e = a.exploration;
  return {
      {"seed", c.seed},
      {"recurrences", c.recurrences},
      {"share_parameters", c.share_parameters},
      {"share_epsilon", c.share_epsilon},
      {"cache_seek_seconds", c.cache_seek_seconds},
      {"spike_factor", c.spike_factor},
      {"ret_list_cap", c.ret_list_cap},
      {"record_item_stats", c.record_item_stats},
      {"mode", to_string(c.cache.mode)},
      {"cache",
       {{"capacity_units", c.cache.capacity_units},
        {"max_units", c.cache.max_units},
        {"unit_size_entities", c.cache.unit_size_entities},
        {"shrink_threshold", c.cache.shrink_threshold}}},
      {"agent",
       {{"kind", to_string(a.kind)},
        {"gamma", a.gamma},
        {"alpha", a.alpha},
        {"beta", a.beta},
        {"tau", a.tau},
        {"theta_batch", a.theta_batch},
        {"cycle_learn", a.cycle_learn},
        {"replay_capacity", a.replay_capacity},
        {"mfu_candidates", a.mfu_candidates},
        {"hidden", a.hidden},
        {"feature_scales",
         {{"cached_lifetime", a.scales.cached_lifetime},
          {"retrieval_latency", a.scales.retrieval_latency},
          {"retrieval_cost", a.scales.retrieval_cost}}},
        {"exploration",
         {{"enabled", a.exploration_enabled},
          {"epsilon", e.epsilon},
          {"zeta", e.zeta},
          {"epsilon_min", e.epsilon_min},
          {"epsilon_max", e.epsilon_max},
          {"reward_threshold", e.reward_threshold},
          {"delta", e.delta},
          {"omega", e.omega}}}}},
      {"eviction",
       {{"policy", to_string(c.eviction.policy)},
        {"eta", c.eviction.eta},
        {"kappa", c.eviction.weights.kappa},
        {"mu", c.eviction.weights.mu},
        {"nu", c.eviction.weights.nu}}},
      {"windows",
       {{"window_seconds", c.windows.window_seconds},
        {"short", c.windows.short_},
        {"mid", c.windows.mid},
        {"long", c.windows.long_}}},
      {"scenario", scenario_to_json(c.scenario)},
  };
}

std::string serialize_config(const SimConfig& cfg) { return config_to_json(cfg).dump(2); }

SimConfig parse_config_text(const std::string& text) { return config_from_json(parse_text(text)); }

SimConfig parse_config(const std::string& path) { return parse_config_text(read_file(path)); }

CompareSpec parse_compare_text(const std::string& text) {
  json base = parse_text(text);
  CompareSpec spec;
  json compare = json::object();
  if (base.is_object() && base.contains("compare")) {
    compare = base["compare"];
    base.erase("compare");
  }
  const SimConfig base_cfg = config_from_json(base);
  Reader r(compare, "compare");
  spec.seeds = {base_cfg.seed};
  if (r.has("seeds")) {
    spec.seeds.clear();
    for (const auto& s : array_at(r, "seeds")) {
      if (!s.is_number_unsigned() && !s.is_number_integer()) range_error("compare.seeds", "expected integers");
      spec.seeds.push_back(s.get<std::uint64_t>());
    }
    if (spec.seeds.empty()) range_error("compare.seeds", "must not be empty");
  }
  r.read("threads", spec.threads);
  if (spec.threads < 1) range_error("compare.threads", "must be >= 1");
  if (r.has("cells")) {
    int i = 0;
    for (const auto& cj : array_at(r, "cells")) {
      const std::string path = "compare.cells[" + std::to_string(i++) + "]";
      if (!cj.is_object() || !cj.contains("name") || !cj["name"].is_string())
        range_error(path, "each cell needs a name");
      json overrides = cj;
      overrides.erase("name");
      json merged = base;
      merged.merge_patch(overrides);
      try {
        spec.cells.push_back({cj["name"].get<std::string>(), config_from_json(merged)});
      } catch (const ConfigError& e) {
        throw ConfigError(e.code, path + "." + e.field, path + ": " + e.what());
      }
    }
  }
  r.finish();
  if (spec.cells.empty()) spec.cells.push_back({"base", base_cfg});
  return spec;
}

CompareSpec parse_compare(const std::string& path) { return parse_compare_text(read_file(path)); }

}  // namespace acoca
