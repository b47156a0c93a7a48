#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "acoca/config.hpp"

namespace acoca {

struct MetricStat {
  double mean = 0;
  double half_width = 0;  // 95% t interval; meaningless when n < 2
  std::size_t n = 0;
  bool has_ci() const { return n >= 2; }
};

// Mean and t-based 95% confidence half-width.
MetricStat summarize_samples(const std::vector<double>& xs);

struct RunMetrics {
  double total_return = 0;
  double earnings_net = 0;  // earnings minus penalties
  double retrieval_cost = 0;
  double mean_rt = 0;
  double hr = 0;
  double pd = 0;
  double entity_evictions = 0;
  double attribute_evictions = 0;
};

RunMetrics run_metrics(const RunReport& report);

struct CellResult {
  std::string name;
  std::vector<RunMetrics> runs;  // one per seed
  MetricStat total_return, earnings_net, retrieval_cost, mean_rt, hr, pd, entity_evictions,
      attribute_evictions;
  bool best = false;
};

struct ComparisonReport {
  std::vector<CellResult> cells;
  std::size_t best_index = 0;
};

// Runs every cell for every seed; cells may run on `threads` workers.
ComparisonReport run_matrix(const CompareSpec& spec);

void write_comparison_csv(std::ostream& os, const ComparisonReport& r);
void write_rt_hr_pd_table(std::ostream& os, const ComparisonReport& r);
void write_return_table(std::ostream& os, const ComparisonReport& r);

}  // namespace acoca
