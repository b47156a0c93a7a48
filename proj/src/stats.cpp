#include "acoca/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace acoca {

void WindowConfig::validate() const {
  if (!(window_seconds > 0)) throw std::invalid_argument("window_seconds must be > 0");
  if (!(short_ > 0 && short_ <= mid && mid <= long_))
    throw std::invalid_argument("windows must satisfy 0 < short <= mid <= long");
}

WindowHistory WindowHistory::from_newest_first(std::span<const double> values) {
  WindowHistory h;
  h.values_.assign(values.begin(), values.end());
  return h;
}

WindowHistory WindowHistory::from_oldest_first(std::span<const double> values) {
  WindowHistory h;
  h.values_.assign(values.rbegin(), values.rend());
  return h;
}

double WindowHistory::at_lag(int lag) const {
  if (lag < 1 || static_cast<std::size_t>(lag) > values_.size()) return 0.0;
  return values_[static_cast<std::size_t>(lag - 1)];
}

void WindowHistory::push_newest(double v, std::size_t capacity) {
  values_.push_front(v);
  while (values_.size() > capacity) values_.pop_back();
}

Horizons summarize_observed(const WindowHistory& h, const WindowConfig& cfg) {
  return {h.at_lag(cfg.short_), h.at_lag(cfg.mid), h.at_lag(cfg.long_)};
}

Horizons extrapolate_expected(const WindowHistory& h, const WindowConfig& cfg, bool clamp_unit) {
  const std::size_t n = std::min(h.size(), static_cast<std::size_t>(cfg.long_));
  auto finish = [&](double v) { return clamp_unit ? std::clamp(v, 0.0, 1.0) : v; };
  if (n == 0) return {};
  if (n < 2) {
    const double v = finish(h.at_lag(1));
    return {v, v, v};
  }
  // x = 0 is the newest sealed window, x = -(n-1) the oldest used.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = -static_cast<double>(k);
    const double y = h.newest_first()[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / dn;
  auto at = [&](int ahead) { return finish(intercept + slope * ahead); };
  return {at(cfg.short_), at(cfg.mid), at(cfg.long_)};
}

double expected_hit_rate(Seconds e_rel, double e_lambda, double e_ar, Seconds lifetime,
                         double f_arrive, double f_thresh) {
  if (is_infinite(lifetime)) return 1.0;
  if (f_arrive <= f_thresh) return 0.0;
  const double x = std::max(0.0, e_rel) * std::max(0.0, e_lambda) * std::max(0.0, e_ar);
  return x / (x + 1.0);
}

WindowHistory ItemStats::access_rate_history() const {
  WindowHistory h;
  for (auto it = sealed.rbegin(); it != sealed.rend(); ++it)
    h.push_newest(it->total_queries ? static_cast<double>(it->n) / it->total_queries : 0.0,
                  sealed.size());
  return h;
}

WindowHistory ItemStats::hit_rate_history() const {
  WindowHistory h;
  for (auto it = sealed.rbegin(); it != sealed.rend(); ++it)
    h.push_newest(it->n ? static_cast<double>(it->m) / it->n : 0.0, sealed.size());
  return h;
}

double ItemStats::delay_given_cached() const {
  return cached_accesses ? static_cast<double>(delayed_cached_accesses) / cached_accesses : 0.0;
}

bool ItemStats::ever_cached() const {
  if (current.cached) return true;
  return std::any_of(sealed.begin(), sealed.end(), [](const WindowCounts& w) { return w.cached; });
}

std::uint64_t ItemStats::recent_accesses(int windows) const {
  std::uint64_t total = 0;
  const std::size_t k = std::min(sealed.size(), static_cast<std::size_t>(std::max(windows, 0)));
  for (std::size_t i = 0; i < k; ++i) total += sealed[i].n;
  return total;
}

std::array<double, kStateSize> StateVector::normalized(const FeatureScales& s) const {
  auto out = values;
  auto scale = [](double v, double by) { return by > 0 ? v / by : v; };
  out[12] = scale(out[12], s.cached_lifetime);
  out[13] = scale(out[13], s.retrieval_latency);
  out[14] = scale(out[14], s.retrieval_cost);
  return out;
}

StateVector build_state_vector(const ItemStats& stats, const WindowConfig& cfg,
                               std::optional<Horizons> heuristic_hit_rate) {
  const auto ar = stats.access_rate_history();
  const auto hr = stats.hit_rate_history();
  const auto ar_obs = summarize_observed(ar, cfg).table_order();
  const auto ar_exp = extrapolate_expected(ar, cfg).table_order();
  const auto hr_obs = summarize_observed(hr, cfg).table_order();
  auto hr_exp = extrapolate_expected(hr, cfg).table_order();
  if (heuristic_hit_rate && !stats.ever_cached()) hr_exp = heuristic_hit_rate->table_order();

  StateVector s;
  std::copy(ar_obs.begin(), ar_obs.end(), s.values.begin());
  std::copy(ar_exp.begin(), ar_exp.end(), s.values.begin() + 3);
  std::copy(hr_obs.begin(), hr_obs.end(), s.values.begin() + 6);
  std::copy(hr_exp.begin(), hr_exp.end(), s.values.begin() + 9);
  s.values[12] = stats.cached_lifetime.mean();
  s.values[13] = stats.retrieval_latency.mean();
  s.values[14] = stats.retrieval_cost.mean();
  return s;
}

bool detect_spike(const ItemStats& stats, const WindowConfig& cfg, double spike_factor) {
  const auto ar = stats.access_rate_history();
  const double ar_short = ar.at_lag(cfg.short_);
  const double ar_mid = ar.at_lag(cfg.mid);
  const std::size_t idx = static_cast<std::size_t>(cfg.short_ - 1);
  const std::uint32_t n_queries = idx < stats.sealed.size() ? stats.sealed[idx].total_queries : 0;
  if (n_queries == 0) return false;
  const double floor = 1.0 / n_queries;
  return ar_short > spike_factor * std::max(ar_mid, floor);
}

StatsTracker::StatsTracker(WindowConfig cfg) : cfg_(cfg) { cfg_.validate(); }

ItemStats& StatsTracker::touch(const Id& id) {
  auto [it, inserted] = items_.try_emplace(id);
  if (inserted) {
    it->second.item_id = id;
    for (std::uint32_t q : query_history_) {
      WindowCounts w;
      w.total_queries = q;
      it->second.sealed.push_back(w);
    }
  }
  return it->second;
}

void StatsTracker::record_query(Seconds) { ++current_queries_; }

void StatsTracker::record_access(const Id& item, bool was_fresh_cache_hit, Seconds) {
  auto& s = touch(item);
  ++s.current.n;
  if (was_fresh_cache_hit) ++s.current.m;
}

void StatsTracker::record_retrieval(const Id& item, Seconds latency, Money cost) {
  auto& s = touch(item);
  s.retrieval_latency.add(latency);
  s.retrieval_cost.add(cost.value());
}

void StatsTracker::record_cached_lifetime(const Id& item, Seconds residence) {
  touch(item).cached_lifetime.add(residence);
}

void StatsTracker::record_cached_access(const Id& item, bool delayed) {
  auto& s = touch(item);
  ++s.cached_accesses;
  if (delayed) ++s.delayed_cached_accesses;
}

void StatsTracker::mark_cached(const Id& item) { touch(item).current.cached = true; }

std::int64_t StatsTracker::roll_window(Seconds now) {
  const std::size_t cap = cfg_.ring_capacity();
  last_sealed_.clear();
  for (auto& [id, s] : items_) {
    WindowCounts w = s.current;
    w.total_queries = current_queries_;
    s.sealed.push_front(w);
    while (s.sealed.size() > cap) s.sealed.pop_back();
    last_sealed_.push_back({window_index_, id, w});
    s.current = WindowCounts{};
  }
  query_history_.push_front(current_queries_);
  while (query_history_.size() > cap) query_history_.pop_back();
  current_queries_ = 0;
  last_roll_ = now;
  return ++window_index_;
}

const ItemStats& StatsTracker::item(const Id& id) { return touch(id); }

const ItemStats* StatsTracker::find(const Id& id) const {
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : &it->second;
}

double StatsTracker::query_rate(double fallback) const {
  if (query_history_.empty()) return fallback;
  double total = 0;
  for (auto q : query_history_) total += q;
  return total / (static_cast<double>(query_history_.size()) * cfg_.window_seconds);
}

void write_item_stats_csv_header(std::ostream& os) { os << "window_index,item_id,n,m,N,AR,HR\n"; }

void write_item_stats_rows(std::ostream& os, const std::vector<ItemWindowRow>& rows) {
  char buf[96];
  for (const auto& r : rows) {
    const auto& c = r.counts;
    const double ar = c.total_queries ? static_cast<double>(c.n) / c.total_queries : 0.0;
    const double hr = c.n ? static_cast<double>(c.m) / c.n : 0.0;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", ar, hr);
    os << r.window_index << ',' << r.item_id << ',' << c.n << ',' << c.m << ',' << c.total_queries
       << ',' << buf << '\n';
  }
}

}  // namespace acoca
