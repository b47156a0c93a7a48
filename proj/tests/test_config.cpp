#include "doctest.h"

#include "acoca/config.hpp"

using namespace acoca;

namespace {

ConfigError error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError(ConfigError::Code::Io, "", "");
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("an empty object yields the defaults over the bundled scenario") {
    const SimConfig c = parse_config_text("{}");
    CHECK(c.seed == 42);
    CHECK(c.recurrences == 1);
    CHECK(c.cache.mode == CacheMode::Scalable);
    CHECK(c.agent.kind == AgentKind::ActorCritic);
    CHECK(c.agent.gamma == 0.9);
    CHECK(c.windows.window_seconds == 5);
    CHECK(c.scenario.workload.templates.size() == 12);
    CHECK(c.scenario.workload.seed == c.seed);
  }

  TEST_CASE("values land in their fields") {
    const SimConfig c = parse_config_text(R"({
      "seed": 7, "recurrences": 3, "mode": "limited",
      "agent": {"kind": "ddpg", "gamma": 0.5, "hidden": [32, 16],
                "exploration": {"epsilon": 0.2, "delta": 2.0}},
      "eviction": {"policy": "tah", "eta": 0.5},
      "windows": {"window_seconds": 10, "short": 1, "mid": 3, "long": 6},
      "cache": {"capacity_units": 2, "max_units": 4}
    })");
    CHECK(c.seed == 7);
    CHECK(c.scenario.workload.seed == 7);
    CHECK(c.cache.mode == CacheMode::Limited);
    CHECK(c.agent.kind == AgentKind::DDPG);
    CHECK(c.agent.hidden == std::vector<int>{32, 16});
    CHECK(c.agent.exploration.epsilon == 0.2);
    CHECK(c.eviction.policy == EvictionPolicy::TAH);
    CHECK(c.windows.long_ == 6);
    CHECK(c.cache.max_units == 4);
  }

  TEST_CASE("out-of-range values name their field") {
    const auto e = error_of(R"({"agent": {"gamma": 1.5}})");
    CHECK(e.code == ConfigError::Code::Range);
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }

  TEST_CASE("unknown keys are rejected with their path") {
    const auto e = error_of(R"({"agent": {"exploration": {"epsilonn": 0.1}}})");
    CHECK(e.code == ConfigError::Code::UnknownKey);
    CHECK(e.field == "agent.exploration.epsilonn");
  }

  TEST_CASE("type mismatches are range errors") {
    CHECK(error_of(R"({"seed": "x"})").code == ConfigError::Code::Range);
    CHECK(error_of(R"({"mode": "nowhere"})").code == ConfigError::Code::Range);
  }

  TEST_CASE("syntax errors carry a line and column") {
    const auto e = error_of("{\n  \"seed\": 1,\n  oops\n}");
    CHECK(e.code == ConfigError::Code::Parse);
    CHECK(e.field.rfind("3:", 0) == 0);
  }

  TEST_CASE("a missing file is an I/O error") {
    try {
      parse_config("/nonexistent/config.json");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.code == ConfigError::Code::Io);
    }
  }

  TEST_CASE("serialization round trips") {
    SimConfig c = parse_config_text(R"({"seed": 9, "mode": "database", "agent": {"kind": "stat"},
                                        "scenario": {"preset": "expanded", "unique_count": 30}})");
    const std::string once = serialize_config(c);
    const std::string twice = serialize_config(parse_config_text(once));
    CHECK(once == twice);
    CHECK(parse_config_text(once).scenario.workload.templates.size() == 30);
  }

  TEST_CASE("infinite lifetimes survive serialization") {
    SimConfig c = parse_config_text("{}");
    c.scenario.catalog.attributes.begin()->second.lifetime = kInfinite;
    const SimConfig back = parse_config_text(serialize_config(c));
    CHECK(is_infinite(back.scenario.catalog.attributes.begin()->second.lifetime));
  }

  TEST_CASE("an SLA without a response limit survives serialization") {
    SimConfig c = parse_config_text("{}");
    c.scenario.catalog.slas.begin()->second.rt_max = kInfinite;
    const std::string text = serialize_config(c);
    CHECK(text.find("null") == std::string::npos);
    CHECK(is_infinite(parse_config_text(text).scenario.catalog.slas.begin()->second.rt_max));
  }

  TEST_CASE("compare cells merge over the base") {
    const auto spec = parse_compare_text(R"({
      "seed": 3, "agent": {"kind": "stat"},
      "compare": {"seeds": [1, 2], "threads": 2, "cells": [
        {"name": "redirector", "mode": "redirector"},
        {"name": "ddpg", "agent": {"kind": "ddpg", "gamma": 0.8}}
      ]}
    })");
    REQUIRE(spec.cells.size() == 2);
    CHECK(spec.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(spec.threads == 2);
    CHECK(spec.cells[0].config.cache.mode == CacheMode::Redirector);
    CHECK(spec.cells[0].config.agent.kind == AgentKind::StatBaseline);
    CHECK(spec.cells[1].config.agent.kind == AgentKind::DDPG);
    CHECK(spec.cells[1].config.agent.gamma == 0.8);
    CHECK(spec.cells[1].config.agent.alpha == 1e-4);
  }

  TEST_CASE("compare without cells runs the base once per seed") {
    const auto spec = parse_compare_text(R"({"seed": 5, "compare": {}})");
    REQUIRE(spec.cells.size() == 1);
    CHECK(spec.cells[0].name == "base");
    CHECK(spec.seeds == std::vector<std::uint64_t>{5});
  }

  TEST_CASE("errors inside a cell name the cell") {
    try {
      parse_compare_text(R"({"compare": {"cells": [{"name": "x", "agent": {"gama": 1}}]}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.code == ConfigError::Code::UnknownKey);
      CHECK(std::string(e.what()).find("cells") != std::string::npos);
    }
  }
}
