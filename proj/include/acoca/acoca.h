#ifndef ACOCA_ACOCA_H
#define ACOCA_ACOCA_H

#include <stdint.h>

#if defined(ACOCA_BUILDING_LIBRARY)
#define ACOCA_API __attribute__((visibility("default")))
#else
#define ACOCA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acoca_status {
  ACOCA_OK = 0,
  ACOCA_ERR_IO = 1,
  ACOCA_ERR_PARSE = 2,
  ACOCA_ERR_UNKNOWN_KEY = 3,
  ACOCA_ERR_RANGE = 4,
  ACOCA_ERR_CATALOG = 5,
  ACOCA_ERR_LOG_VERSION = 6,
  ACOCA_ERR_LOG_TRUNCATED = 7,
  ACOCA_ERR_INVALID_ARGUMENT = 8,
  ACOCA_ERR_INTERNAL = 9
} acoca_status;

/* Output selection for acoca_report_write. */
enum {
  ACOCA_FORMAT_CSV = 1,
  ACOCA_FORMAT_JSON = 2,
  ACOCA_FORMAT_BOTH = 3
};

typedef struct acoca_config acoca_config;
typedef struct acoca_report acoca_report;

ACOCA_API const char* acoca_version(void);

/* Short name of a status code, e.g. "UNKNOWN_KEY". */
ACOCA_API const char* acoca_status_name(acoca_status s);

/* Message of the most recent failure on the calling thread. */
ACOCA_API const char* acoca_last_error(void);

ACOCA_API acoca_status acoca_config_load(const char* path, acoca_config** out);
ACOCA_API acoca_status acoca_config_from_json(const char* text, acoca_config** out);
ACOCA_API acoca_status acoca_config_set_seed(acoca_config* cfg, uint64_t seed);
/* Caller releases *out with acoca_string_free. */
ACOCA_API acoca_status acoca_config_to_json(const acoca_config* cfg, char** out);
ACOCA_API void acoca_config_free(acoca_config* cfg);

ACOCA_API acoca_status acoca_run(const acoca_config* cfg, acoca_report** out);
/* Writes windows.csv (CSV), summary.json (JSON), events.jsonl and timing.csv. */
ACOCA_API acoca_status acoca_report_write(const acoca_report* r, const char* out_dir, int formats);
ACOCA_API acoca_status acoca_report_summary_json(const acoca_report* r, char** out);
/* Earnings, penalties and retrieval cost of the whole run; any pointer may be NULL. */
ACOCA_API acoca_status acoca_report_total_return(const acoca_report* r, double* total,
                                                 double* earnings, double* penalties,
                                                 double* retrieval_cost);
ACOCA_API void acoca_report_free(acoca_report* r);

/* Recomputes the summary from an event log. `sla_book_path` may be NULL; when
   given it is a JSON array of SLA records used to re-price every outcome. */
ACOCA_API acoca_status acoca_replay(const char* events_path, const char* sla_book_path,
                                    char** summary_out);

/* Runs the comparison matrix of a config and writes comparison.csv,
   table_rt_hr_pd.csv and table_returns.csv. threads <= 0 keeps the config value. */
ACOCA_API acoca_status acoca_compare(const char* config_path, const char* out_dir, int threads,
                                     char** comparison_csv_out);

/* Scenario as JSON. expanded_unique == 0 gives the bundled scenario. */
ACOCA_API acoca_status acoca_scenario_json(const acoca_config* cfg, uint32_t expanded_unique,
                                           char** out);
/* Arrival trace of the first recurrence as CSV. */
ACOCA_API acoca_status acoca_arrivals_csv(const acoca_config* cfg, char** out);

ACOCA_API void acoca_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
