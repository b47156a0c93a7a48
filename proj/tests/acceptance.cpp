// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when a
// gating criterion fails. Criterion 12 is reported but never gates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "acoca/agents.hpp"
#include "acoca/config.hpp"
#include "acoca/economics.hpp"
#include "acoca/sim.hpp"
#include "acoca/stats.hpp"
#include "acoca/workload.hpp"
#include "oracles.hpp"

using namespace acoca;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string windows_csv(const RunReport& r) {
  std::ostringstream os;
  write_windows_csv(os, r);
  return os.str();
}

SimConfig bundled(const std::string& overrides) {
  return parse_config_text(overrides);
}

// Identity and PessiRet bounds, checked on every run this binary makes.
struct IdentityAudit {
  int runs = 0;
  int windows = 0;
  std::vector<std::string> failures;

  void check(const std::string& name, const RunReport& r) {
    ++runs;
    const auto& p = r.totals.parts;
    if (r.totals.total() != p.earnings - p.penalties - p.retrieval_cost)
      failures.push_back(name + ": total != earnings - penalties - cost");
    Money ledger;
    for (const auto& rec : r.recurrences) {
      ledger += rec.counters.retrieval_ledger;
      for (const auto& w : rec.windows) {
        ++windows;
        if (!w.empty && w.pessi_ret > w.mean_ret + 1e-9)
          failures.push_back(name + ": PessiRet above mean Ret in window " + std::to_string(w.window_index));
      }
    }
    if (ledger != p.retrieval_cost) failures.push_back(name + ": retrieval cost differs from ledger");
    // the event ledger itself: every logged retrieval at its provider's price
    const auto providers = config_from_json(r.log.header().at("config")).scenario.catalog.providers;
    Money logged;
    for (const auto& rec : r.log.records())
      if (rec.at("type") == "retrieval")
        logged += Money::from_micros(
            providers.at(rec.at("provider").get<std::string>()).cost_per_retrieval.micros() *
            rec.at("attempts").get<int>());
    if (logged != p.retrieval_cost)
      failures.push_back(name + ": logged retrieval events disagree with charged cost");
  }
};

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  IdentityAudit audit;
  int gating_failures = 0;

  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn, bool gating = true) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const char* verdict = o.pass ? "PASS" : (gating ? "FAIL" : "INFO-FAIL");
    if (!o.pass && gating) ++gating_failures;
    std::printf("%s [%2d] %s: %s (%.2fs)\n", verdict, id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "formula exactness", [] {
    bool ok = true;
    RewardEvent ev;
    ev.cached = true;
    ok &= compute_reward(ev) == -10.0;
    ev.cached = false;
    ok &= compute_reward(ev) == 5.0;
    int mapping = 0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = i / 1000.0;
      const Seconds avg = 37.5;
      const int mid = 5;
      const Action a = map_value_to_action(v, avg, mid);
      if (v > 0.5) mapping += !(a.cache && std::abs(a.cl - (v - 0.5) * avg / 0.5) <= 1e-12 * avg);
      else mapping += !(!a.cache && a.dt == static_cast<int>(std::ceil((0.5 - v) * mid / 0.5 - 1e-9)));
    }
    ok &= mapping == 0;
    // E[HR]: infinite lifetime gives 1, stale arrival gives 0, otherwise x / (x + 1)
    ok &= expected_hit_rate(3, 2, 0.5, kInfinite, 0.1, 0.5) == 1.0;
    ok &= expected_hit_rate(3, 2, 0.5, 10, 0.5, 0.5) == 0.0;
    const double x = 3 * 2 * 0.5;
    ok &= expected_hit_rate(3, 2, 0.5, 10, 0.9, 0.5) == x / (x + 1);
    return Outcome{ok, "rewards -10/+5, 1001 mapping points, E[HR] branches" +
                           std::string(mapping ? " (mapping mismatches)" : "")};
  });

  report(2, "gradient correctness", [] {
    const auto r = oracle::check_gradients(2024, 20);
    return Outcome{r.max_relative_error < 1e-4 && r.networks == 20,
                   fmt("max relative error %.3g over %.0f values on 20 nets", r.max_relative_error,
                       static_cast<double>(r.parameters_checked))};
  });

  report(3, "soft-update law", [] {
    const double a = oracle::soft_update_deviation(11, 0.001, 1000);
    const double b = oracle::soft_update_deviation(12, 0.3, 60);
    const double worst = std::max(a, b);
    return Outcome{worst < 1e-12, fmt("max deviation %.3g from (1-tau)^k", worst)};
  });

  report(4, "eviction oracle equivalence", [] {
    const auto r = oracle::check_eviction(4242, 200);
    return Outcome{r.mismatches == 0,
                   fmt("%.0f of %.0f plans match", r.caches - r.mismatches, r.caches) +
                       (r.first_mismatch.empty() ? "" : "; first mismatch " + r.first_mismatch)};
  });

  report(5, "window summarization", [] {
    WindowConfig c;
    c.short_ = 1;
    c.mid = 2;
    c.long_ = 5;
    const std::vector<double> h = {0, 0.67, 0.93, 0.86, 0.73};
    const auto s = summarize_observed(WindowHistory::from_newest_first(h), c).table_order();
    const bool ok = s[0] == 0.73 && s[1] == 0.67 && s[2] == 0.0;
    return Outcome{ok, fmt("[%.2f, %.2f, %.2f]", s[0], s[1], s[2])};
  });

  const SimConfig ddpg_cfg = bundled(
      R"({"recurrences": 3, "mode": "scalable", "agent": {"kind": "ddpg"}, "eviction": {"policy": "lfu"}})");
  SimConfig red_cfg = ddpg_cfg;
  red_cfg.cache.mode = CacheMode::Redirector;
  RunReport ddpg, red;

  report(6, "determinism", [&] {
    ddpg = run(ddpg_cfg);
    const RunReport again = run(ddpg_cfg);
    audit.check("ddpg", ddpg);
    audit.check("ddpg-again", again);
    const bool same_log = ddpg.log.str() == again.log.str();
    const bool same_csv = windows_csv(ddpg) == windows_csv(again);
    const RunReport back = replay(EventLog::parse(ddpg.log.str()));
    const bool same_summary = back.summary_json == ddpg.summary_json;
    return Outcome{same_log && same_csv && same_summary,
                   std::string("log ") + (same_log ? "identical" : "differs") + ", windows.csv " +
                       (same_csv ? "identical" : "differs") + ", replayed summary " +
                       (same_summary ? "identical" : "differs")};
  });

  report(7, "directional cost efficiency", [&] {
    red = run(red_cfg);
    audit.check("redirector", red);
    double best = -1e300;
    std::string per;
    for (std::size_t r = 0; r < ddpg.recurrences.size(); ++r) {
      const double d = ddpg.recurrences[r].totals.total().value();
      const double b = red.recurrences[r].totals.total().value();
      const double gain = (d - b) / std::abs(b);
      best = std::max(best, gain);
      per += fmt(" r%.0f: %.2f vs %.2f", static_cast<double>(r), d, b);
    }
    return Outcome{best >= 0.2, fmt("best improvement %.1f%%;", 100 * best) + per};
  });

  report(8, "latency benefit", [&] {
    const auto& dr = ddpg.recurrences.back().outcomes;
    const auto& rr = red.recurrences.back().outcomes;
    std::map<Id, int> uses;
    for (const auto& o : dr) ++uses[o.template_id];
    Id top;
    for (const auto& [t, n] : uses)
      if (top.empty() || n > uses[top]) top = t;
    auto mean_rt = [&](const std::vector<AccessOutcome>& v) {
      double s = 0;
      int n = 0;
      for (const auto& o : v)
        if (o.template_id == top) {
          s += o.response_time;
          ++n;
        }
      return n ? s / n : 0.0;
    };
    const double a = mean_rt(dr), b = mean_rt(rr);
    const double cut = 1 - a / b;
    return Outcome{cut >= 0.5, "template " + top + fmt(": mean RT %.3fs vs %.3fs, %.1f%% lower", a, b, 100 * cut)};
  });

  report(9, "correlation structure", [&] {
    std::vector<double> rt, hr;
    std::uint64_t queries = 0;
    for (const auto& r : ddpg.recurrences)
      for (const auto& w : r.windows)
        if (!w.empty) {
          rt.push_back(w.mean_rt);
          hr.push_back(w.hr);
          queries += w.queries;
        }
    const double c = pearson(rt, hr);
    return Outcome{queries >= 100 && c <= -0.5,
                   fmt("pearson(RT, HR) = %.3f over %.0f windows, %.0f queries", c,
                       static_cast<double>(rt.size()), static_cast<double>(queries))};
  });

  report(10, "accounting identity", [&] {
    for (const char* mode : {"database", "limited"}) {
      SimConfig c = ddpg_cfg;
      c.recurrences = 1;
      c.cache.mode = cache_mode_from_string(mode);
      if (c.cache.mode == CacheMode::Limited) c.cache.max_units = c.cache.capacity_units;
      audit.check(mode, run(c));
    }
    SimConfig stat = ddpg_cfg;
    stat.recurrences = 1;
    stat.agent.kind = AgentKind::StatBaseline;
    audit.check("stat", run(stat));
    SimConfig ac = ddpg_cfg;
    ac.recurrences = 1;
    ac.agent.kind = AgentKind::ActorCritic;
    ac.eviction.policy = EvictionPolicy::TAH;
    audit.check("acagn-tah", run(ac));
    return Outcome{audit.failures.empty(),
                   fmt("%.0f runs, %.0f windows checked", audit.runs, audit.windows) +
                       (audit.failures.empty() ? "" : "; " + audit.failures.front())};
  });

  report(11, "workload statistics", [&] {
    WorkloadSpec w = ddpg_cfg.scenario.workload;
    w.duration = 40000;
    double expected = w.lambda_rate * w.duration;
    for (const auto& s : w.spike_schedule) {
      const double overlap = std::max(0.0, std::min(s.end, w.duration) - std::max(0.0, s.start));
      expected += w.lambda_rate * (s.multiplier - 1) * overlap;
    }
    Rng rng(2718);
    const auto arrivals = generate_arrivals(w, rng);
    const double n = static_cast<double>(arrivals.size());
    const double z_rate = (n - expected) / std::sqrt(expected);

    ContextProvider p{"p", 0.997, 0.012, 1, Money::from_double(0.1), 1};
    Rng lrng(31);
    const int draws = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < draws; ++i) {
      const double x = sample_provider_latency(p, lrng, w.latency_floor);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / draws;
    const double se = std::sqrt(0.012 / draws);
    const double z_lat = (mean - 0.997) / se;
    return Outcome{std::abs(z_rate) <= 3 && std::abs(z_lat) <= 3,
                   fmt("arrivals z = %.2f (%.0f events), latency mean %.5f", z_rate, n, mean) +
                       fmt(" z = %.2f over 1e5 draws", z_lat)};
  });

  report(12, "learning trend (informational)", [&] {
    SimConfig c = ddpg_cfg;
    c.recurrences = 10;
    const RunReport r = run(c);
    audit.check("ddpg-10", r);
    std::string per;
    for (const auto& rec : r.recurrences)
      per += " " + std::to_string(rec.counters.entity_evictions);
    const auto first = r.recurrences.front().counters.entity_evictions;
    const auto last = r.recurrences.back().counters.entity_evictions;
    return Outcome{last <= first, "entity evictions per period:" + per};
  }, false);

  std::printf("%s: %d gating criteria failed\n", gating_failures ? "FAILED" : "ACCEPTED", gating_failures);
  return gating_failures ? 1 : 0;
}
