#include "acoca/event_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace acoca {

using nlohmann::json;

json sla_to_json(const ConsumerSla& s) {
  return {{"id", s.sla_id},
          {"price", s.price_per_response.value()},
          {"freshness_threshold", s.freshness_threshold},
          {"delay_penalty", s.delay_penalty.value()},
          {"invalid_penalty", s.invalid_penalty.value()},
          {"rt_max", is_infinite(s.rt_max) ? json("inf") : json(s.rt_max)}};
}

ConsumerSla sla_from_json(const json& j) {
  ConsumerSla s;
  s.sla_id = j.at("id").get<std::string>();
  s.price_per_response = Money::from_double(j.at("price").get<double>());
  s.freshness_threshold = j.at("freshness_threshold").get<double>();
  s.delay_penalty = Money::from_double(j.at("delay_penalty").get<double>());
  s.invalid_penalty = Money::from_double(j.at("invalid_penalty").get<double>());
  const json& rt = j.at("rt_max");
  s.rt_max = rt.is_string() && rt.get<std::string>() == "inf" ? kInfinite : rt.get<double>();
  return s;
}

json sla_book_to_json(const std::map<Id, ConsumerSla>& book) {
  json a = json::array();
  for (const auto& [_, s] : book) a.push_back(sla_to_json(s));
  return a;
}

std::map<Id, ConsumerSla> sla_book_from_json(const json& j) {
  std::map<Id, ConsumerSla> book;
  for (const auto& x : j) {
    ConsumerSla s = sla_from_json(x);
    book[s.sla_id] = s;
  }
  return book;
}

HitKind hit_kind_from_string(const std::string& s) {
  if (s == "complete") return HitKind::Complete;
  if (s == "partial") return HitKind::Partial;
  if (s == "miss") return HitKind::Miss;
  throw std::invalid_argument("unknown hit kind: " + s);
}

json outcome_to_json(const AccessOutcome& o, int recurrence) {
  return {{"type", "query"},
          {"rec", recurrence},
          {"q", o.query_id},
          {"w", o.window_index},
          {"t", o.arrival_time},
          {"tpl", o.template_id},
          {"sla", o.sla_id},
          {"rt", o.response_time},
          {"valid", o.valid},
          {"delayed", o.delayed},
          {"cost", o.retrieval_costs_charged.micros()},
          {"nret", o.retrievals_triggered},
          {"hit", to_string(o.hit_kind)},
          {"ghost", o.ghost},
          {"acc", o.attribute_accesses},
          {"fresh", o.fresh_attribute_hits}};
}

AccessOutcome outcome_from_json(const json& j) {
  AccessOutcome o;
  o.query_id = j.at("q").get<std::uint64_t>();
  o.window_index = j.at("w").get<std::int64_t>();
  o.arrival_time = j.at("t").get<double>();
  o.template_id = j.at("tpl").get<std::string>();
  o.sla_id = j.at("sla").get<std::string>();
  o.response_time = j.at("rt").get<double>();
  o.valid = j.at("valid").get<bool>();
  o.delayed = j.at("delayed").get<bool>();
  o.retrieval_costs_charged = Money::from_micros(j.at("cost").get<std::int64_t>());
  o.retrievals_triggered = j.at("nret").get<int>();
  o.hit_kind = hit_kind_from_string(j.at("hit").get<std::string>());
  o.ghost = j.at("ghost").get<bool>();
  o.attribute_accesses = j.at("acc").get<int>();
  o.fresh_attribute_hits = j.at("fresh").get<int>();
  return o;
}

void EventLog::set_header(json config, const std::map<Id, ConsumerSla>& book, Seconds window_seconds) {
  header_ = {{"type", "header"},
             {"format", "acoca-events"},
             {"version", kEventLogVersion},
             {"window_seconds", window_seconds},
             {"sla_book", sla_book_to_json(book)},
             {"config", std::move(config)}};
}

void EventLog::close() {
  closed_ = true;
}

std::map<Id, ConsumerSla> EventLog::sla_book() const { return sla_book_from_json(header_.at("sla_book")); }

Seconds EventLog::window_seconds() const { return header_.at("window_seconds").get<double>(); }

void EventLog::write(std::ostream& os) const {
  os << header_.dump() << '\n';
  for (const auto& r : records_) os << r.dump() << '\n';
  if (closed_) os << json{{"type", "footer"}, {"records", records_.size()}}.dump() << '\n';
}

std::string EventLog::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

EventLog EventLog::read(std::istream& is) {
  EventLog log;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (log.closed_) throw LogTruncated("records after footer at line " + std::to_string(lineno));
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LogTruncated("unparseable record at line " + std::to_string(lineno));
    }
    const std::string type = j.value("type", "");
    if (!have_header) {
      if (type != "header" || j.value("format", "") != "acoca-events")
        throw LogTruncated("event log has no header");
      if (j.value("version", -1) != kEventLogVersion)
        throw LogVersionMismatch("event log version " + std::to_string(j.value("version", -1)) +
                                 ", expected " + std::to_string(kEventLogVersion));
      log.header_ = std::move(j);
      have_header = true;
      continue;
    }
    if (type == "footer") {
      if (j.value("records", std::size_t{0}) != log.records_.size())
        throw LogTruncated("footer record count does not match");
      log.closed_ = true;
      continue;
    }
    log.records_.push_back(std::move(j));
  }
  if (!have_header) throw LogTruncated("event log is empty");
  if (!log.closed_) throw LogTruncated("event log ends without a footer");
  return log;
}

EventLog EventLog::parse(const std::string& text) {
  std::istringstream is(text);
  return read(is);
}

}  // namespace acoca
