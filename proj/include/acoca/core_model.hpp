#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace acoca {

using Seconds = double;
using Id = std::string;

inline constexpr Seconds kInfinite = std::numeric_limits<double>::infinity();

inline bool is_infinite(Seconds s) { return std::isinf(s); }

// Fixed-point currency in micro-units. Sums are exact, which the accounting
// identities rely on.
class Money {
public:
  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t m) { Money r; r.micros_ = m; return r; }
  static Money from_double(double v) { return from_micros(std::llround(v * 1e6)); }

  constexpr std::int64_t micros() const { return micros_; }
  double value() const { return static_cast<double>(micros_) / 1e6; }

  constexpr Money operator+(Money o) const { return from_micros(micros_ + o.micros_); }
  constexpr Money operator-(Money o) const { return from_micros(micros_ - o.micros_); }
  constexpr Money operator-() const { return from_micros(-micros_); }
  constexpr Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
  constexpr Money& operator-=(Money o) { micros_ -= o.micros_; return *this; }
  constexpr auto operator<=>(const Money&) const = default;

private:
  std::int64_t micros_ = 0;
};

struct ContextProvider {
  Id provider_id;
  Seconds latency_mean = 1.0;
  double latency_var = 0.0;
  double sampling_rate = 1.0;  // Hz
  Money cost_per_retrieval;
  double availability = 1.0;
};

struct ContextAttribute {
  Id attr_id;
  Id entity_id;
  std::vector<Id> provider_ids;
  Seconds lifetime = kInfinite;
};

struct ContextEntity {
  Id entity_id;
  std::set<Id> attribute_ids;
};

struct ConsumerSla {
  Id sla_id;
  Money price_per_response;
  double freshness_threshold = 0.5;
  Money delay_penalty;
  Money invalid_penalty;
  Seconds rt_max = 1.0;
};

struct ContextCatalog {
  std::map<Id, ContextEntity> entities;
  std::map<Id, ContextAttribute> attributes;
  std::map<Id, ContextProvider> providers;
  std::map<Id, ConsumerSla> slas;
};

struct CatalogViolation {
  enum class Kind { DanglingReference, NonPositiveField, OutOfRange, Empty };
  Kind kind;
  std::string field;  // reference kind or field name
  Id id;

  std::string describe() const;
};

class CatalogError : public std::runtime_error {
public:
  explicit CatalogError(std::vector<CatalogViolation> v);
  const std::vector<CatalogViolation>& violations() const { return violations_; }

private:
  std::vector<CatalogViolation> violations_;
};

// A catalog whose referential integrity and field ranges have been checked.
// Only constructible through validate_catalog.
class ValidatedCatalog {
public:
  const ContextCatalog& raw() const { return catalog_; }
  const ContextAttribute& attribute(const Id& id) const;
  const ContextEntity& entity(const Id& id) const;
  const ContextProvider& provider(const Id& id) const;
  const ConsumerSla& sla(const Id& id) const;

  // Provider with the lowest mean latency (ties by id).
  const ContextProvider& primary_provider(const Id& attr_id) const;
  // max(1/SR_q, L_i) using the primary provider.
  Seconds effective_lifetime(const Id& attr_id) const;
  double min_freshness_threshold() const;
  Money max_retrieval_cost() const;
  Seconds max_rt_max() const;

private:
  friend ValidatedCatalog validate_catalog(ContextCatalog raw);
  explicit ValidatedCatalog(ContextCatalog c) : catalog_(std::move(c)) {}
  ContextCatalog catalog_;
};

std::vector<CatalogViolation> check_catalog(const ContextCatalog& raw);
// Throws CatalogError listing every violation found.
ValidatedCatalog validate_catalog(ContextCatalog raw);

// Freshness of a value on arrival, 1 - latency/L clamped to [0,1].
double arrival_freshness(Seconds mean_retrieval_latency, Seconds lifetime);

// Time a retrieved value stays above f_thresh. Infinite when f_arrive == 1.
Seconds residual_lifetime(double f_arrive, double f_thresh, Seconds mean_retrieval_latency);

// Linear decay 1 - age/L clamped to [0,1].
double freshness_at(Seconds age, Seconds lifetime);

}  // namespace acoca
