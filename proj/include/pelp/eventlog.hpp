#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pelp/timestamp.hpp"

namespace pelp {

/// Ordered activity labels of one case.
using Activities = std::vector<std::string>;

struct Event {
  std::string case_id;
  Ticks timestamp = 0;
  std::string timestamp_text;
  std::string activity;
};

struct Trace {
  std::string case_id;
  Activities activities;

  bool operator==(const Trace&) const = default;
};

/// An ordered list of traces. Immutable once built; every trace holds at
/// least one activity.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<Trace> traces);
  /// Convenience for logs without case identifiers (text logs, predictions).
  static EventLog from_sequences(std::vector<Activities> sequences);

  const std::vector<Trace>& traces() const noexcept { return traces_; }
  std::size_t size() const noexcept { return traces_.size(); }
  bool empty() const noexcept { return traces_.empty(); }
  const Trace& operator[](std::size_t i) const { return traces_[i]; }

  /// Distinct activity labels, sorted byte-wise.
  std::vector<std::string> activity_universe() const;
  std::size_t event_count() const noexcept;
  std::vector<Activities> sequences() const;

  /// Traces [first, first + count), clamped to the log.
  EventLog slice(std::size_t first, std::size_t count) const;

  /// Compares activity sequences only; case identifiers are ignored.
  bool same_sequences(const EventLog& other) const;

 private:
  std::vector<Trace> traces_;
};

struct CsvOptions {
  std::string case_column = "case";
  std::string time_column = "timestamp";
  std::string activity_column = "activity";
  std::string time_format = std::string(kIsoFormat);
  char delimiter = ',';
};

/// Reads every data row of a headed CSV file as an Event, in file order.
/// Quoted fields (RFC 4180) are supported. Throws ConfigError when a mapped
/// column is missing and ParseError (with line number) on a bad row.
std::vector<Event> read_events_csv(const std::filesystem::path& path, const CsvOptions& options = {});
std::vector<Event> read_events_csv(std::istream& in, const CsvOptions& options = {});

/// Groups events into traces and applies the canonical ordering:
/// events by (timestamp, activity); traces by (first timestamp,
/// first activity, case id). Equal (timestamp, activity) events keep input order.
EventLog build_traces(std::vector<Event> events);

/// read_events_csv followed by build_traces.
EventLog parse_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Text log: one trace per line, activities separated by a single space,
/// LF line endings, trailing newline.
std::string format_text(const EventLog& log);
EventLog parse_text(std::string_view text);
void write_text(const EventLog& log, const std::filesystem::path& path);
EventLog read_text(const std::filesystem::path& path);

struct LengthStats {
  std::size_t max = 0;
  std::size_t min = 0;
  double mean = 0.0;
  double median = 0.0;
};

/// Log characteristics: counts, variants and case-length statistics.
struct StatReport {
  std::size_t cases = 0;
  std::size_t activity_instances = 0;
  std::size_t variants = 0;
  std::size_t unique_activities = 0;
  std::optional<LengthStats> lengths;  // absent for an empty log

  std::string to_string() const;
};

StatReport log_stats(const EventLog& log);

}  // namespace pelp
