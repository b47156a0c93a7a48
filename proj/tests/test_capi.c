/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "acoca/acoca.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char* kConfig =
    "{\"seed\": 5, \"mode\": \"scalable\", \"agent\": {\"kind\": \"stat\"},"
    " \"scenario\": {\"preset\": \"bundled\"}}";

static char* slurp(const char* path) {
  FILE* f = fopen(path, "rb");
  if (!f) return NULL;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  char* buf = malloc((size_t)n + 1);
  if (buf && fread(buf, 1, (size_t)n, f) != (size_t)n) n = 0;
  if (buf) buf[n] = '\0';
  fclose(f);
  return buf;
}

/* Start of the value stored under `key`, skipping the colon and spaces. */
static const char* value_of(const char* text, const char* key) {
  char pat[128];
  snprintf(pat, sizeof pat, "\"%s\"", key);
  const char* p = text ? strstr(text, pat) : NULL;
  if (!p) return NULL;
  p += strlen(pat);
  while (*p == ' ' || *p == ':') ++p;
  return p;
}

static void write_text(const char* path, const char* text) {
  FILE* f = fopen(path, "wb");
  if (!f) return;
  fputs(text, f);
  fclose(f);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "capi_out";
  char path[1024], path2[1024];

  CHECK(strcmp(acoca_version(), "1.0.0") == 0);
  CHECK(strcmp(acoca_status_name(ACOCA_ERR_UNKNOWN_KEY), "UNKNOWN_KEY") == 0);

  acoca_config* cfg = NULL;
  CHECK(acoca_config_from_json("{\"agent\": {\"gama\": 1}}", &cfg) == ACOCA_ERR_UNKNOWN_KEY);
  CHECK(cfg == NULL);
  CHECK(strstr(acoca_last_error(), "gama") != NULL);
  CHECK(acoca_config_from_json("{\"agent\": {\"gamma\": 1.5}}", &cfg) == ACOCA_ERR_RANGE);
  CHECK(acoca_config_from_json("{", &cfg) == ACOCA_ERR_PARSE);
  CHECK(acoca_config_load("/nonexistent/x.json", &cfg) == ACOCA_ERR_IO);
  CHECK(acoca_run(NULL, NULL) == ACOCA_ERR_INVALID_ARGUMENT);

  CHECK(acoca_config_from_json(kConfig, &cfg) == ACOCA_OK);
  CHECK(acoca_config_set_seed(cfg, 6) == ACOCA_OK);
  char* echo = NULL;
  CHECK(acoca_config_to_json(cfg, &echo) == ACOCA_OK);
  CHECK(value_of(echo, "seed") && atoi(value_of(echo, "seed")) == 6);
  acoca_string_free(echo);

  acoca_report* rep = NULL;
  CHECK(acoca_run(cfg, &rep) == ACOCA_OK);
  double total = 0, earn = 0, pen = 0, cost = 0;
  CHECK(acoca_report_total_return(rep, &total, &earn, &pen, &cost) == ACOCA_OK);
  CHECK(fabs(total - (earn - pen - cost)) < 1e-6);
  CHECK(acoca_report_total_return(rep, &total, NULL, NULL, NULL) == ACOCA_OK);

  char* summary = NULL;
  CHECK(acoca_report_summary_json(rep, &summary) == ACOCA_OK);
  CHECK(summary && strstr(summary, "\"total_return\"") != NULL);

  CHECK(acoca_report_write(rep, dir, ACOCA_FORMAT_BOTH) == ACOCA_OK);
  snprintf(path, sizeof path, "%s/windows.csv", dir);
  char* csv = slurp(path);
  CHECK(csv && strncmp(csv, "recurrence,window,queries,", 26) == 0);
  free(csv);

  /* replay of the written log reproduces the summary */
  snprintf(path, sizeof path, "%s/events.jsonl", dir);
  char* replayed = NULL;
  CHECK(acoca_replay(path, NULL, &replayed) == ACOCA_OK);
  CHECK(replayed && summary && strcmp(replayed, summary) == 0);
  acoca_string_free(replayed);

  /* re-pricing with a generous SLA book raises the return */
  snprintf(path2, sizeof path2, "%s/book.json", dir);
  char book[8192] = "[";
  char* scen = NULL;
  CHECK(acoca_scenario_json(cfg, 0, &scen) == ACOCA_OK);
  CHECK(scen && strstr(scen, "\"slas\"") != NULL);
  /* build the book from the SLA ids that appear in the scenario */
  {
    const char* p = scen ? strstr(scen, "\"slas\"") : NULL;
    const char* stop = p ? strchr(p, ']') : NULL;
    int first = 1;
    while (p && (p = value_of(p, "id")) != NULL && p < stop) {
      ++p; /* opening quote */
      const char* end = strchr(p, '"');
      if (!end) break;
      char entry[256];
      snprintf(entry, sizeof entry,
               "%s{\"id\":\"%.*s\",\"price\":10,\"freshness_threshold\":0.5,"
               "\"delay_penalty\":0,\"invalid_penalty\":0,\"rt_max\":100}",
               first ? "" : ",", (int)(end - p), p);
      strncat(book, entry, sizeof book - strlen(book) - 2);
      first = 0;
      p = end;
    }
  }
  strcat(book, "]");
  write_text(path2, book);
  char* repriced = NULL;
  CHECK(acoca_replay(path, path2, &repriced) == ACOCA_OK);
  if (repriced) {
    const char* t = value_of(repriced, "total_return");
    CHECK(t != NULL);
    if (t) CHECK(atof(t) > total);
  }
  acoca_string_free(repriced);
  acoca_string_free(scen);

  /* a truncated log is rejected */
  char* log = slurp(path);
  if (log) {
    size_t n = strlen(log);
    if (n > 2) {
      char* last = log + n - 2;
      while (last > log && *last != '\n') --last;
      last[1] = '\0';
    }
    snprintf(path2, sizeof path2, "%s/truncated.jsonl", dir);
    write_text(path2, log);
    free(log);
    char* out = NULL;
    CHECK(acoca_replay(path2, NULL, &out) == ACOCA_ERR_LOG_TRUNCATED);
  }

  char* arrivals = NULL;
  CHECK(acoca_arrivals_csv(cfg, &arrivals) == ACOCA_OK);
  CHECK(arrivals && strncmp(arrivals, "arrival_time", 12) == 0);
  acoca_string_free(arrivals);

  acoca_string_free(summary);
  acoca_report_free(rep);
  acoca_config_free(cfg);
  acoca_report_free(NULL);
  acoca_config_free(NULL);
  acoca_string_free(NULL);

  if (failures) fprintf(stderr, "%d checks failed\n", failures);
  else printf("capi: all checks passed\n");
  return failures ? 1 : 0;
}
