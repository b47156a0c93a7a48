#include "doctest.h"

#include <random>
#include <sstream>
#include <vector>

#include "acoca/stats.hpp"

using namespace acoca;

namespace {

WindowConfig cfg125() {
  WindowConfig c;
  c.short_ = 1;
  c.mid = 2;
  c.long_ = 5;
  return c;
}

// Independent least-squares fit evaluated `ahead` windows after the newest.
double ols_forecast(const std::vector<double>& oldest_first, double ahead) {
  const double n = static_cast<double>(oldest_first.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < oldest_first.size(); ++i) {
    mx += static_cast<double>(i);
    my += oldest_first[i];
  }
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < oldest_first.size(); ++i) {
    num += (static_cast<double>(i) - mx) * (oldest_first[i] - my);
    den += (static_cast<double>(i) - mx) * (static_cast<double>(i) - mx);
  }
  const double slope = num / den;
  return my + slope * ((n - 1) + ahead - mx);
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("window summarization of the worked example") {
    const std::vector<double> h = {0, 0.67, 0.93, 0.86, 0.73};
    const auto hist = WindowHistory::from_newest_first(h);
    const auto s = summarize_observed(hist, cfg125()).table_order();
    CHECK(s[0] == 0.73);
    CHECK(s[1] == 0.67);
    CHECK(s[2] == 0.0);
  }

  TEST_CASE("windows beyond the retained history read zero") {
    const std::vector<double> h = {0.4};
    const auto s = summarize_observed(WindowHistory::from_newest_first(h), cfg125());
    CHECK(s.short_v == 0.4);
    CHECK(s.mid_v == 0.0);
    CHECK(s.long_v == 0.0);
  }

  TEST_CASE("oldest-first and newest-first constructors agree") {
    const std::vector<double> a = {0.1, 0.2, 0.3}, b = {0.3, 0.2, 0.1};
    CHECK(WindowHistory::from_oldest_first(a).newest_first() ==
          WindowHistory::from_newest_first(b).newest_first());
  }

  TEST_CASE("linear extrapolation continues a trend") {
    const std::vector<double> h = {0.2, 0.4, 0.6};
    WindowConfig c;
    c.short_ = 1;
    c.mid = 1;
    c.long_ = 3;
    const auto e = extrapolate_expected(WindowHistory::from_oldest_first(h), c);
    CHECK(e.short_v == doctest::Approx(0.8));
    CHECK(e.long_v == doctest::Approx(1.0));  // 1.2 clamped
    const auto u = extrapolate_expected(WindowHistory::from_oldest_first(h), c, false);
    CHECK(u.long_v == doctest::Approx(1.2));
  }

  TEST_CASE("extrapolation matches an independent least-squares fit") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    WindowConfig c;  // 1/5/10
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> oldest_first(3 + trial % 12);
      for (auto& x : oldest_first) x = u(rng);
      const auto e = extrapolate_expected(WindowHistory::from_oldest_first(oldest_first), c, false);
      // only the newest `long` windows enter the fit
      const std::vector<double> used(oldest_first.end() - std::min<std::ptrdiff_t>(10, oldest_first.size()),
                                     oldest_first.end());
      CHECK(e.short_v == doctest::Approx(ols_forecast(used, 1)));
      CHECK(e.mid_v == doctest::Approx(ols_forecast(used, 5)));
      CHECK(e.long_v == doctest::Approx(ols_forecast(used, 10)));
    }
  }

  TEST_CASE("extrapolation with one or no windows") {
    const std::vector<double> one = {0.3};
    const auto e = extrapolate_expected(WindowHistory::from_oldest_first(one), cfg125());
    CHECK(e.mid_v == 0.3);
    const auto z = extrapolate_expected(WindowHistory{}, cfg125());
    CHECK(z.long_v == 0.0);
  }

  TEST_CASE("expected hit rate branches") {
    CHECK(expected_hit_rate(1, 1, 1, kInfinite, 0.2, 0.5) == 1.0);
    CHECK(expected_hit_rate(1, 1, 1, 10, 0.4, 0.5) == 0.0);
    CHECK(expected_hit_rate(1, 1, 1, 10, 0.5, 0.5) == 0.0);
    CHECK(expected_hit_rate(1, 1, 1, 10, 0.9, 0.5) == 0.5);
    CHECK(expected_hit_rate(2, 3, 0.5, 10, 0.9, 0.5) == doctest::Approx(3.0 / 4.0));
  }

  TEST_CASE("expected hit rate is monotone and bounded") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 5);
    for (int i = 0; i < 500; ++i) {
      const double r = u(rng), l = u(rng), a = u(rng) / 5, d = u(rng) / 10;
      const double base = expected_hit_rate(r, l, a, 10, 0.9, 0.5);
      CHECK(base >= 0);
      CHECK(base <= 1);
      CHECK(expected_hit_rate(r + d, l, a, 10, 0.9, 0.5) >= base);
      CHECK(expected_hit_rate(r, l + d, a, 10, 0.9, 0.5) >= base);
      CHECK(expected_hit_rate(r, l, a + d, 10, 0.9, 0.5) >= base);
    }
  }

  TEST_CASE("tracker seals windows and computes AR and HR") {
    StatsTracker t(cfg125());
    for (int i = 0; i < 4; ++i) t.record_query(i);
    t.record_access("x", true, 0.5);
    t.record_access("x", false, 1.5);
    t.record_access("y", false, 2.5);
    CHECK(t.roll_window(5) == 1);  // index of the new open window
    const ItemStats& x = t.item("x");
    REQUIRE(x.sealed.size() == 1);
    CHECK(x.sealed[0].n == 2);
    CHECK(x.sealed[0].m == 1);
    CHECK(x.sealed[0].total_queries == 4);
    CHECK(x.access_rate_history().at_lag(1) == 0.5);
    CHECK(x.hit_rate_history().at_lag(1) == 0.5);
    CHECK(t.current_window() == 1);
    CHECK(t.last_sealed().size() == 2);
  }

  TEST_CASE("items first seen late are padded with zero windows") {
    StatsTracker t(cfg125());
    t.record_query(0);
    t.roll_window(5);
    t.record_query(6);
    t.roll_window(10);
    t.record_query(11);
    t.record_access("late", false, 11);
    t.roll_window(15);
    const ItemStats& s = t.item("late");
    REQUIRE(s.sealed.size() == 3);
    CHECK(s.sealed[0].n == 1);
    CHECK(s.sealed[1].n == 0);
    CHECK(s.sealed[1].total_queries == 1);
  }

  TEST_CASE("ring keeps long plus one windows") {
    StatsTracker t(cfg125());
    for (int w = 0; w < 20; ++w) {
      t.record_access("x", false, w * 5.0);
      t.roll_window((w + 1) * 5.0);
    }
    CHECK(t.item("x").sealed.size() == 6);
  }

  TEST_CASE("query rate comes from sealed windows") {
    StatsTracker t(cfg125());
    CHECK(t.query_rate(2.5) == 2.5);
    for (int i = 0; i < 10; ++i) t.record_query(i * 0.5);
    t.roll_window(5);
    CHECK(t.query_rate(99) == doctest::Approx(2.0));
  }

  TEST_CASE("spike detection needs a sharp rise over the mid window") {
    WindowConfig c;  // 1/5/10
    StatsTracker t(c);
    auto window = [&](int queries, int accesses, double start) {
      for (int i = 0; i < queries; ++i) t.record_query(start);
      for (int i = 0; i < accesses; ++i) t.record_access("x", false, start);
      t.roll_window(start + 5);
    };
    for (int w = 0; w < 6; ++w) window(10, 1, w * 5.0);
    CHECK_FALSE(detect_spike(t.item("x"), c, 2.0));
    window(10, 5, 30);
    CHECK(detect_spike(t.item("x"), c, 2.0));
  }

  TEST_CASE("a first busy window spikes only above the floor") {
    WindowConfig c;
    StatsTracker t(c);
    for (int i = 0; i < 10; ++i) t.record_query(0);
    for (int i = 0; i < 5; ++i) t.record_access("x", false, 0);
    for (int i = 0; i < 2; ++i) t.record_access("y", false, 0);
    t.roll_window(5);
    CHECK(detect_spike(t.item("x"), c, 2.0));
    CHECK_FALSE(detect_spike(t.item("y"), c, 2.0));
    CHECK_FALSE(detect_spike(t.item("never"), c, 2.0));
  }

  TEST_CASE("state vector layout and means") {
    WindowConfig c;
    StatsTracker t(c);
    t.record_query(0);
    t.record_query(0);
    t.record_access("x", true, 0);
    t.record_retrieval("x", 0.8, Money::from_double(0.2));
    t.record_retrieval("x", 1.2, Money::from_double(0.4));
    t.record_cached_lifetime("x", 30);
    t.roll_window(5);
    const StateVector s = build_state_vector(t.item("x"), c);
    CHECK(s.ar_short() == 0.5);
    CHECK(s.values[0] == 0.0);  // long horizon not yet observed
    CHECK(s.values[8] == 1.0);  // HR short
    CHECK(s.mean_cached_lifetime() == 30);
    CHECK(s.mean_retrieval_latency() == doctest::Approx(1.0));
    CHECK(s.mean_retrieval_cost() == doctest::Approx(0.3));
    const auto n = s.normalized(FeatureScales{});
    CHECK(n[12] == doctest::Approx(30.0 / 50.0));
  }

  TEST_CASE("heuristic hit rate fills E[HR] for never-cached items only") {
    WindowConfig c;
    StatsTracker t(c);
    t.record_query(0);
    t.record_access("x", false, 0);
    t.roll_window(5);
    const Horizons h{0.1, 0.2, 0.3};
    const StateVector s = build_state_vector(t.item("x"), c, h);
    CHECK(s.values[9] == 0.3);
    CHECK(s.values[10] == 0.2);
    CHECK(s.values[11] == 0.1);
    t.mark_cached("x");
    const StateVector s2 = build_state_vector(t.item("x"), c, h);
    CHECK(s2.values[9] == 0.0);
  }

  TEST_CASE("item stats CSV") {
    StatsTracker t(cfg125());
    t.record_query(0);
    t.record_access("x", true, 0);
    t.roll_window(5);
    std::ostringstream os;
    write_item_stats_csv_header(os);
    write_item_stats_rows(os, t.last_sealed());
    CHECK(os.str().rfind("window_index,item_id,n,m,N,AR,HR\n0,x,1,1,1,", 0) == 0);
  }

  TEST_CASE("window config validation") {
    WindowConfig c;
    c.mid = 20;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = WindowConfig{};
    c.window_seconds = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}
