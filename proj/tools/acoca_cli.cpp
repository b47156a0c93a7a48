#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "acoca/acoca.h"

namespace {

struct Failure {
  int exit_code;
};

[[noreturn]] void die(acoca_status s) {
  std::fprintf(stderr, "error[%s]: %s\n", acoca_status_name(s), acoca_last_error());
  throw Failure{s == ACOCA_ERR_IO ? 2 : 1};
}

void check(acoca_status s) {
  if (s != ACOCA_OK) die(s);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  acoca_string_free(s);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "error[IO]: cannot write %s\n", p.string().c_str());
    throw Failure{1};
  }
}

acoca_config* load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  acoca_config* cfg = nullptr;
  check(acoca_config_load(path.c_str(), &cfg));
  if (seed) check(acoca_config_set_seed(cfg, *seed));
  return cfg;
}

int format_flags(const std::string& f) {
  if (f == "csv") return ACOCA_FORMAT_CSV;
  if (f == "json") return ACOCA_FORMAT_JSON;
  return ACOCA_FORMAT_BOTH;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive context caching simulator"};
  app.require_subcommand(1);

  std::string config, out = "results", format = "both", events, sla;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::uint32_t unique = 0;

  auto* run = app.add_subcommand("run", "run one simulation");
  run->add_option("--config", config, "configuration file")->required();
  run->add_option("--seed", seed, "override the seed");
  run->add_option("--out", out, "output directory");
  run->add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));

  auto* compare = app.add_subcommand("compare", "run a comparison matrix");
  compare->add_option("--config", config, "configuration file with a compare section")->required();
  compare->add_option("--out", out, "output directory");
  compare->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);

  auto* gen = app.add_subcommand("gen-scenario", "write a scenario and its arrival trace");
  gen->add_option("--config", config, "configuration file");
  gen->add_option("--seed", seed, "override the seed");
  gen->add_option("--unique", unique, "expanded scenario with this many distinct templates");
  gen->add_option("--out", out, "output directory");

  auto* replay = app.add_subcommand("replay", "recompute metrics from an event log");
  replay->add_option("events", events, "event log (events.jsonl)")->required();
  replay->add_option("--sla", sla, "alternate SLA book (JSON array)");
  replay->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error[USAGE]: %s\n", msg.c_str());
    return 2;
  }

  try {
    const std::filesystem::path dir(out);
    if (*run) {
      acoca_config* cfg = load_config(config, seed);
      acoca_report* rep = nullptr;
      const acoca_status s = acoca_run(cfg, &rep);
      acoca_config_free(cfg);
      check(s);
      check(acoca_report_write(rep, out.c_str(), format_flags(format)));
      double total = 0, earnings = 0, penalties = 0, cost = 0;
      check(acoca_report_total_return(rep, &total, &earnings, &penalties, &cost));
      char* summary = nullptr;
      check(acoca_report_summary_json(rep, &summary));
      const auto j = nlohmann::json::parse(take(summary));
      acoca_report_free(rep);
      std::printf("earnings %.6f\npenalties %.6f\nearnings_minus_penalties %.6f\nretrieval_cost %.6f\n"
                  "total_return %.6f\nqueries %llu\nhr %.6f\nmean_rt %.6f\npd %.6f\n",
                  earnings, penalties, earnings - penalties, cost, total,
                  static_cast<unsigned long long>(j.at("queries").get<std::uint64_t>()),
                  j.at("hr").get<double>(), j.at("mean_rt").get<double>(), j.at("pd").get<double>());
    } else if (*compare) {
      char* csv = nullptr;
      check(acoca_compare(config.c_str(), out.c_str(), threads, &csv));
      std::fputs(take(csv).c_str(), stdout);
    } else if (*gen) {
      acoca_config* cfg = nullptr;
      if (!config.empty()) cfg = load_config(config, seed);
      else check(acoca_config_from_json("{}", &cfg));
      if (seed) check(acoca_config_set_seed(cfg, *seed));
      char* scen = nullptr;
      acoca_status s = acoca_scenario_json(cfg, unique, &scen);
      if (s != ACOCA_OK) {
        acoca_config_free(cfg);
        die(s);
      }
      const std::string scenario = take(scen);
      if (unique > 0) {
        // rebuild the config around the expanded scenario so arrivals match it
        char* base = nullptr;
        check(acoca_config_to_json(cfg, &base));
        auto j = nlohmann::json::parse(take(base));
        j["scenario"] = nlohmann::json::parse(scenario);
        acoca_config_free(cfg);
        cfg = nullptr;
        check(acoca_config_from_json(j.dump().c_str(), &cfg));
      }
      char* arrivals = nullptr;
      s = acoca_arrivals_csv(cfg, &arrivals);
      acoca_config_free(cfg);
      check(s);
      write_text(dir / "scenario.json", scenario + "\n");
      write_text(dir / "arrivals.csv", take(arrivals));
      std::printf("wrote %s and %s\n", (dir / "scenario.json").string().c_str(),
                  (dir / "arrivals.csv").string().c_str());
    } else if (*replay) {
      char* summary = nullptr;
      check(acoca_replay(events.c_str(), sla.empty() ? nullptr : sla.c_str(), &summary));
      const std::string text = take(summary);
      if (replay->count("--out")) write_text(dir / "summary.json", text + "\n");
      std::puts(text.c_str());
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return 0;
}
