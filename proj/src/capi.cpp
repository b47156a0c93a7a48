#include "acoca/acoca.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "acoca/config.hpp"
#include "acoca/event_log.hpp"
#include "acoca/matrix.hpp"
#include "acoca/sim.hpp"

struct acoca_config {
  acoca::SimConfig cfg;
};

struct acoca_report {
  acoca::RunReport report;
};

namespace {

thread_local std::string g_last_error;

acoca_status fail(acoca_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) return nullptr;
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

template <class F>
acoca_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const acoca::ConfigError& e) {
    switch (e.code) {
      case acoca::ConfigError::Code::Io: return fail(ACOCA_ERR_IO, e.what());
      case acoca::ConfigError::Code::Parse: return fail(ACOCA_ERR_PARSE, e.what());
      case acoca::ConfigError::Code::UnknownKey: return fail(ACOCA_ERR_UNKNOWN_KEY, e.what());
      case acoca::ConfigError::Code::Range: return fail(ACOCA_ERR_RANGE, e.what());
    }
    return fail(ACOCA_ERR_INTERNAL, e.what());
  } catch (const acoca::CatalogError& e) {
    return fail(ACOCA_ERR_CATALOG, e.what());
  } catch (const acoca::LogVersionMismatch& e) {
    return fail(ACOCA_ERR_LOG_VERSION, e.what());
  } catch (const acoca::LogTruncated& e) {
    return fail(ACOCA_ERR_LOG_TRUNCATED, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ACOCA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ACOCA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ACOCA_ERR_INTERNAL, "unknown error");
  }
}

acoca_status write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) return fail(ACOCA_ERR_IO, "cannot write " + p.string());
  out << content;
  out.close();
  if (!out) return fail(ACOCA_ERR_IO, "cannot write " + p.string());
  return ACOCA_OK;
}

acoca_status ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return fail(ACOCA_ERR_IO, "cannot create " + dir + ": " + ec.message());
  return ACOCA_OK;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw acoca::ConfigError(acoca::ConfigError::Code::Io, path, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

extern "C" {

const char* acoca_version(void) { return "1.0.0"; }

const char* acoca_status_name(acoca_status s) {
  switch (s) {
    case ACOCA_OK: return "OK";
    case ACOCA_ERR_IO: return "IO";
    case ACOCA_ERR_PARSE: return "PARSE";
    case ACOCA_ERR_UNKNOWN_KEY: return "UNKNOWN_KEY";
    case ACOCA_ERR_RANGE: return "RANGE";
    case ACOCA_ERR_CATALOG: return "CATALOG";
    case ACOCA_ERR_LOG_VERSION: return "LOG_VERSION";
    case ACOCA_ERR_LOG_TRUNCATED: return "LOG_TRUNCATED";
    case ACOCA_ERR_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case ACOCA_ERR_INTERNAL: return "INTERNAL";
  }
  return "INTERNAL";
}

const char* acoca_last_error(void) { return g_last_error.c_str(); }

acoca_status acoca_config_load(const char* path, acoca_config** out) {
  if (!path || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new acoca_config{acoca::parse_config(path)};
    return ACOCA_OK;
  });
}

acoca_status acoca_config_from_json(const char* text, acoca_config** out) {
  if (!text || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new acoca_config{acoca::parse_config_text(text)};
    return ACOCA_OK;
  });
}

acoca_status acoca_config_set_seed(acoca_config* cfg, uint64_t seed) {
  if (!cfg) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null config");
  cfg->cfg.seed = seed;
  cfg->cfg.scenario.workload.seed = seed;
  return ACOCA_OK;
}

acoca_status acoca_config_to_json(const acoca_config* cfg, char** out) {
  if (!cfg || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(acoca::serialize_config(cfg->cfg));
    return ACOCA_OK;
  });
}

void acoca_config_free(acoca_config* cfg) { delete cfg; }

acoca_status acoca_run(const acoca_config* cfg, acoca_report** out) {
  if (!cfg || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new acoca_report{acoca::run(cfg->cfg)};
    return ACOCA_OK;
  });
}

acoca_status acoca_report_write(const acoca_report* r, const char* out_dir, int formats) {
  if (!r || !out_dir) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  if (formats < ACOCA_FORMAT_CSV || formats > ACOCA_FORMAT_BOTH)
    return fail(ACOCA_ERR_INVALID_ARGUMENT, "formats must be csv, json or both");
  return guarded([&] {
    if (auto s = ensure_dir(out_dir); s != ACOCA_OK) return s;
    const std::filesystem::path dir(out_dir);
    if (formats & ACOCA_FORMAT_CSV) {
      std::ostringstream w, t;
      acoca::write_windows_csv(w, r->report);
      if (auto s = write_file(dir / "windows.csv", w.str()); s != ACOCA_OK) return s;
      acoca::write_timing_csv(t, r->report);
      if (auto s = write_file(dir / "timing.csv", t.str()); s != ACOCA_OK) return s;
      if (!r->report.item_rows.empty()) {
        std::ostringstream is;
        acoca::write_item_stats_csv_header(is);
        acoca::write_item_stats_rows(is, r->report.item_rows);
        if (auto s = write_file(dir / "item_stats.csv", is.str()); s != ACOCA_OK) return s;
      }
    }
    if (formats & ACOCA_FORMAT_JSON) {
      if (auto s = write_file(dir / "summary.json", r->report.summary_json + "\n"); s != ACOCA_OK) return s;
    }
    return write_file(dir / "events.jsonl", r->report.log.str());
  });
}

acoca_status acoca_report_summary_json(const acoca_report* r, char** out) {
  if (!r || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  *out = dup_string(r->report.summary_json);
  return ACOCA_OK;
}

acoca_status acoca_report_total_return(const acoca_report* r, double* total, double* earnings,
                                       double* penalties, double* retrieval_cost) {
  if (!r) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null report");
  const auto& p = r->report.totals.parts;
  if (total) *total = p.total().value();
  if (earnings) *earnings = p.earnings.value();
  if (penalties) *penalties = p.penalties.value();
  if (retrieval_cost) *retrieval_cost = p.retrieval_cost.value();
  return ACOCA_OK;
}

void acoca_report_free(acoca_report* r) { delete r; }

acoca_status acoca_replay(const char* events_path, const char* sla_book_path, char** summary_out) {
  if (!events_path || !summary_out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ifstream in(events_path, std::ios::binary);
    if (!in) return fail(ACOCA_ERR_IO, std::string("cannot read ") + events_path);
    const acoca::EventLog log = acoca::EventLog::read(in);
    acoca::RunReport rep;
    if (sla_book_path) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text(sla_book_path));
      } catch (const nlohmann::json::parse_error& e) {
        return fail(ACOCA_ERR_PARSE, std::string("SLA book: ") + e.what());
      }
      if (j.is_object() && j.contains("slas")) j = j["slas"];
      std::map<acoca::Id, acoca::ConsumerSla> book;
      try {
        book = acoca::sla_book_from_json(j);
      } catch (const nlohmann::json::exception& e) {
        return fail(ACOCA_ERR_PARSE, std::string("SLA book: ") + e.what());
      }
      rep = acoca::replay(log, &book);
    } else {
      rep = acoca::replay(log);
    }
    *summary_out = dup_string(rep.summary_json);
    return ACOCA_OK;
  });
}

acoca_status acoca_compare(const char* config_path, const char* out_dir, int threads,
                           char** comparison_csv_out) {
  if (!config_path || !out_dir) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    acoca::CompareSpec spec = acoca::parse_compare(config_path);
    if (threads > 0) spec.threads = threads;
    const acoca::ComparisonReport rep = acoca::run_matrix(spec);
    if (auto s = ensure_dir(out_dir); s != ACOCA_OK) return s;
    const std::filesystem::path dir(out_dir);
    std::ostringstream cmp, t6, t8;
    acoca::write_comparison_csv(cmp, rep);
    acoca::write_rt_hr_pd_table(t6, rep);
    acoca::write_return_table(t8, rep);
    if (auto s = write_file(dir / "comparison.csv", cmp.str()); s != ACOCA_OK) return s;
    if (auto s = write_file(dir / "table_rt_hr_pd.csv", t6.str()); s != ACOCA_OK) return s;
    if (auto s = write_file(dir / "table_returns.csv", t8.str()); s != ACOCA_OK) return s;
    if (comparison_csv_out) *comparison_csv_out = dup_string(cmp.str());
    return ACOCA_OK;
  });
}

acoca_status acoca_scenario_json(const acoca_config* cfg, uint32_t expanded_unique, char** out) {
  if (!out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    acoca::Scenario s;
    if (expanded_unique > 0) s = acoca::expanded_scenario(expanded_unique);
    else if (cfg) s = cfg->cfg.scenario;
    else s = acoca::bundled_scenario();
    *out = dup_string(acoca::scenario_to_json(s).dump(2));
    return ACOCA_OK;
  });
}

acoca_status acoca_arrivals_csv(const acoca_config* cfg, char** out) {
  if (!cfg || !out) return fail(ACOCA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ostringstream os;
    acoca::write_arrivals_csv(os, acoca::recurrence_arrivals(cfg->cfg, 0));
    *out = dup_string(os.str());
    return ACOCA_OK;
  });
}

void acoca_string_free(char* s) { std::free(s); }

}  // extern "C"
