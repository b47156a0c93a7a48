#include "acoca/matrix.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace acoca {

MetricStat summarize_samples(const std::vector<double>& xs) {
  MetricStat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  s.half_width = t * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

RunMetrics run_metrics(const RunReport& report) {
  RunMetrics m;
  m.total_return = report.totals.total().value();
  m.earnings_net = (report.totals.parts.earnings - report.totals.parts.penalties).value();
  m.retrieval_cost = report.totals.parts.retrieval_cost.value();
  double rt = 0;
  std::uint64_t q = 0, delayed = 0, acc = 0, fresh = 0;
  for (const auto& r : report.recurrences) {
    for (const auto& o : r.outcomes) {
      rt += o.response_time;
      ++q;
      delayed += o.delayed;
      acc += static_cast<std::uint64_t>(o.attribute_accesses);
      fresh += static_cast<std::uint64_t>(o.fresh_attribute_hits);
    }
    m.entity_evictions += static_cast<double>(r.counters.entity_evictions);
    m.attribute_evictions += static_cast<double>(r.counters.attribute_evictions);
  }
  if (q) {
    m.mean_rt = rt / static_cast<double>(q);
    m.pd = static_cast<double>(delayed) / static_cast<double>(q);
  }
  if (acc) m.hr = static_cast<double>(fresh) / static_cast<double>(acc);
  return m;
}

namespace {

void aggregate(CellResult& c) {
  auto col = [&](double RunMetrics::*f) {
    std::vector<double> xs;
    for (const auto& r : c.runs) xs.push_back(r.*f);
    return summarize_samples(xs);
  };
  c.total_return = col(&RunMetrics::total_return);
  c.earnings_net = col(&RunMetrics::earnings_net);
  c.retrieval_cost = col(&RunMetrics::retrieval_cost);
  c.mean_rt = col(&RunMetrics::mean_rt);
  c.hr = col(&RunMetrics::hr);
  c.pd = col(&RunMetrics::pd);
  c.entity_evictions = col(&RunMetrics::entity_evictions);
  c.attribute_evictions = col(&RunMetrics::attribute_evictions);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string ci(const MetricStat& s) { return s.has_ci() ? fmt(s.half_width) : "n/a"; }

std::string pm(const MetricStat& s) { return fmt(s.mean) + " ± " + ci(s); }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

ComparisonReport run_matrix(const CompareSpec& spec) {
  if (spec.cells.empty()) throw std::invalid_argument("comparison needs at least one cell");
  ComparisonReport report;
  report.cells.resize(spec.cells.size());
  const std::size_t jobs = spec.cells.size() * spec.seeds.size();
  std::vector<RunMetrics> results(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      try {
        SimConfig cfg = spec.cells[j / spec.seeds.size()].config;
        cfg.seed = spec.seeds[j % spec.seeds.size()];
        cfg.scenario.workload.seed = cfg.seed;
        results[j] = run_metrics(run(cfg));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    CellResult& cell = report.cells[c];
    cell.name = spec.cells[c].name;
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) cell.runs.push_back(results[c * spec.seeds.size() + s]);
    aggregate(cell);
    if (cell.total_return.mean > report.cells[report.best_index].total_return.mean) report.best_index = c;
  }
  report.cells[report.best_index].best = true;
  return report;
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& r) {
  os << "cell,runs";
  for (const char* m : {"total_return", "earnings_net", "retrieval_cost", "mean_rt", "hr", "pd",
                        "entity_evictions", "attribute_evictions"})
    os << ',' << m << "_mean," << m << "_ci95";
  os << ",best\n";
  for (const auto& c : r.cells) {
    os << quoted(c.name) << ',' << c.runs.size();
    for (const MetricStat* s : {&c.total_return, &c.earnings_net, &c.retrieval_cost, &c.mean_rt, &c.hr,
                                &c.pd, &c.entity_evictions, &c.attribute_evictions})
      os << ',' << fmt(s->mean) << ',' << ci(*s);
    os << ',' << (c.best ? 1 : 0) << '\n';
  }
}

void write_rt_hr_pd_table(std::ostream& os, const ComparisonReport& r) {
  os << "cell,rt,hr,pd\n";
  for (const auto& c : r.cells)
    os << quoted(c.name) << ',' << pm(c.mean_rt) << ',' << pm(c.hr) << ',' << pm(c.pd) << '\n';
}

void write_return_table(std::ostream& os, const ComparisonReport& r) {
  os << "cell,earnings_minus_penalties,retrieval_cost,total_return,best\n";
  for (const auto& c : r.cells)
    os << quoted(c.name) << ',' << pm(c.earnings_net) << ',' << pm(c.retrieval_cost) << ','
       << pm(c.total_return) << ',' << (c.best ? 1 : 0) << '\n';
}

}  // namespace acoca
