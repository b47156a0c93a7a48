#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "acoca/core_model.hpp"
#include "acoca/economics.hpp"

namespace acoca {

inline constexpr int kEventLogVersion = 1;

struct LogVersionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LogTruncated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON-lines log: a header record, the simulation records, then a footer
// that carries the record count.
class EventLog {
public:
  void set_header(nlohmann::json config, const std::map<Id, ConsumerSla>& book,
                  Seconds window_seconds);
  void add(nlohmann::json record) { records_.push_back(std::move(record)); }
  void close();

  const nlohmann::json& header() const { return header_; }
  const std::vector<nlohmann::json>& records() const { return records_; }
  bool closed() const { return closed_; }

  std::map<Id, ConsumerSla> sla_book() const;
  Seconds window_seconds() const;

  void write(std::ostream& os) const;
  std::string str() const;
  static EventLog read(std::istream& is);
  static EventLog parse(const std::string& text);

private:
  nlohmann::json header_;
  std::vector<nlohmann::json> records_;
  bool closed_ = false;
};

nlohmann::json sla_to_json(const ConsumerSla& s);
ConsumerSla sla_from_json(const nlohmann::json& j);
nlohmann::json sla_book_to_json(const std::map<Id, ConsumerSla>& book);
std::map<Id, ConsumerSla> sla_book_from_json(const nlohmann::json& j);

HitKind hit_kind_from_string(const std::string& s);
nlohmann::json outcome_to_json(const AccessOutcome& o, int recurrence);
AccessOutcome outcome_from_json(const nlohmann::json& j);

}  // namespace acoca
