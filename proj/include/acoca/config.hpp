#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "acoca/sim.hpp"

namespace acoca {

struct ConfigError : std::runtime_error {
  enum class Code { Io, Parse, UnknownKey, Range };
  ConfigError(Code c, std::string field, const std::string& msg)
      : std::runtime_error(msg), code(c), field(std::move(field)) {}
  Code code;
  std::string field;  // dotted path of the offending key, or "line:col" for parse errors
};

const char* to_string(ConfigError::Code c);

SimConfig parse_config(const std::string& path);
SimConfig parse_config_text(const std::string& text);
SimConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const SimConfig& cfg);
std::string serialize_config(const SimConfig& cfg);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& path = "scenario");

struct CompareCell {
  std::string name;
  SimConfig config;
};

struct CompareSpec {
  std::vector<CompareCell> cells;
  std::vector<std::uint64_t> seeds;
  int threads = 1;
};

// A config whose "compare" section lists cells; each cell is a partial config
// merged over the base.
CompareSpec parse_compare(const std::string& path);
CompareSpec parse_compare_text(const std::string& text);

}  // namespace acoca
