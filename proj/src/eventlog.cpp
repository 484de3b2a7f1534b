#include "pelp/eventlog.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pelp/error.hpp"

namespace pelp {

EventLog::EventLog(std::vector<Trace> traces) : traces_(std::move(traces)) {
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    if (traces_[i].activities.empty()) {
      throw ContractError("trace " + std::to_string(i) + " has no activities");
    }
  }
}

EventLog EventLog::from_sequences(std::vector<Activities> sequences) {
  std::vector<Trace> traces;
  traces.reserve(sequences.size());
  for (auto& seq : sequences) traces.push_back(Trace{{}, std::move(seq)});
  return EventLog(std::move(traces));
}

std::vector<std::string> EventLog::activity_universe() const {
  std::set<std::string> labels;
  for (const auto& trace : traces_) labels.insert(trace.activities.begin(), trace.activities.end());
  return {labels.begin(), labels.end()};
}

std::size_t EventLog::event_count() const noexcept {
  std::size_t total = 0;
  for (const auto& trace : traces_) total += trace.activities.size();
  return total;
}

std::vector<Activities> EventLog::sequences() const {
  std::vector<Activities> out;
  out.reserve(traces_.size());
  for (const auto& trace : traces_) out.push_back(trace.activities);
  return out;
}

EventLog EventLog::slice(std::size_t first, std::size_t count) const {
  first = std::min(first, traces_.size());
  count = std::min(count, traces_.size() - first);
  EventLog out;
  out.traces_.assign(traces_.begin() + static_cast<std::ptrdiff_t>(first),
                     traces_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

bool EventLog::same_sequences(const EventLog& other) const {
  return std::equal(traces_.begin(), traces_.end(), other.traces_.begin(), other.traces_.end(),
                    [](const Trace& a, const Trace& b) { return a.activities == b.activities; });
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

/// Splits RFC 4180 records. Quoted fields may contain delimiters, doubled
/// quotes and line breaks.
class CsvReader {
 public:
  CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

  /// Line number where the most recently returned record started.
  std::size_t record_line() const { return record_line_; }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (true) {
      if (c == EOF) {
        if (quoted) throw ParseError("unterminated quoted field", record_line_);
        fields.push_back(std::move(field));
        return true;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"' && field.empty() && !field_was_quoted) {
        quoted = true;
        field_was_quoted = true;
      } else if (ch == delimiter_) {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && in_.peek() == '\n') in_.get();
        ++line_;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(ch);
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("CSV header has no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields.front().empty();
}

}  // namespace

std::vector<Event> read_events_csv(std::istream& in, const CsvOptions& options) {
  if (in.peek() == 0xEF) {
    char bom[3] = {};
    in.read(bom, 3);
    if (in.gcount() != 3 || std::string_view(bom, 3) != "\xEF\xBB\xBF") {
      throw ParseError("malformed byte order mark", 1);
    }
  }
  CsvReader reader(in, options.delimiter);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw ParseError("CSV input is empty (no header row)", 1);
  const auto header = fields;
  const std::size_t case_col = column_index(header, options.case_column);
  const std::size_t time_col = column_index(header, options.time_column);
  const std::size_t act_col = column_index(header, options.activity_column);
  const std::size_t needed = std::max({case_col, time_col, act_col}) + 1;

  std::vector<Event> events;
  while (reader.next(fields)) {
    if (blank(fields)) continue;
    const std::size_t line = reader.record_line();
    if (fields.size() < needed) {
      throw ParseError("expected at least " + std::to_string(needed) + " fields, found " +
                           std::to_string(fields.size()),
                       line);
    }
    Event event;
    event.case_id = fields[case_col];
    event.timestamp_text = fields[time_col];
    event.activity = fields[act_col];
    try {
      event.timestamp = parse_timestamp(event.timestamp_text, options.time_format);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line);
    }
    if (event.activity.empty()) throw ParseError("empty activity label", line);
    events.push_back(std::move(event));
  }
  return events;
}

std::vector<Event> read_events_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return read_events_csv(in, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

EventLog build_traces(std::vector<Event> events) {
  std::unordered_map<std::string, std::vector<Event>> by_case;
  std::vector<std::string> case_order;
  for (auto& event : events) {
    auto [it, inserted] = by_case.try_emplace(event.case_id);
    if (inserted) case_order.push_back(event.case_id);
    it->second.push_back(std::move(event));
  }

  struct Keyed {
    Ticks first_time;
    Trace trace;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(case_order.size());
  for (const auto& case_id : case_order) {
    auto& case_events = by_case[case_id];
    std::stable_sort(case_events.begin(), case_events.end(), [](const Event& a, const Event& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.activity < b.activity;
    });
    Trace trace{case_id, {}};
    trace.activities.reserve(case_events.size());
    for (auto& e : case_events) trace.activities.push_back(std::move(e.activity));
    keyed.push_back({case_events.front().timestamp, std::move(trace)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.first_time != b.first_time) return a.first_time < b.first_time;
    if (a.trace.activities.front() != b.trace.activities.front()) {
      return a.trace.activities.front() < b.trace.activities.front();
    }
    return a.trace.case_id < b.trace.case_id;
  });

  std::vector<Trace> traces;
  traces.reserve(keyed.size());
  for (auto& k : keyed) traces.push_back(std::move(k.trace));
  return EventLog(std::move(traces));
}

EventLog parse_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return build_traces(read_events_csv(path, options));
}

// ---------------------------------------------------------------------------
// Text log format

std::string format_text(const EventLog& log) {
  std::string out;
  for (const auto& trace : log.traces()) {
    for (std::size_t i = 0; i < trace.activities.size(); ++i) {
      const auto& a = trace.activities[i];
      if (a.empty() || a.find_first_of(" \t\r\n\v\f") != std::string::npos) {
        throw ContractError("activity '" + a + "' cannot be written to a text log");
      }
      if (i) out.push_back(' ');
      out += a;
    }
    out.push_back('\n');
  }
  return out;
}

EventLog parse_text(std::string_view text) {
  std::vector<Activities> sequences;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Activities activities;
    std::istringstream words{std::string(line)};
    std::string word;
    while (words >> word) activities.push_back(std::move(word));
    if (activities.empty()) throw ParseError("empty trace line", line_no);
    sequences.push_back(std::move(activities));
  }
  return EventLog::from_sequences(std::move(sequences));
}

void write_text(const EventLog& log, const std::filesystem::path& path) {
  const std::string text = format_text(log);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

EventLog read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_text(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Statistics

StatReport log_stats(const EventLog& log) {
  StatReport report;
  report.cases = log.size();
  report.activity_instances = log.event_count();
  report.unique_activities = log.activity_universe().size();
  std::set<Activities> variants;
  for (const auto& t : log.traces()) variants.insert(t.activities);
  report.variants = variants.size();
  if (log.empty()) return report;

  std::vector<std::size_t> lengths;
  lengths.reserve(log.size());
  for (const auto& t : log.traces()) lengths.push_back(t.activities.size());
  std::sort(lengths.begin(), lengths.end());
  LengthStats stats;
  stats.min = lengths.front();
  stats.max = lengths.back();
  stats.mean = static_cast<double>(report.activity_instances) / static_cast<double>(lengths.size());
  const std::size_t mid = lengths.size() / 2;
  stats.median = lengths.size() % 2 == 1
                     ? static_cast<double>(lengths[mid])
                     : (static_cast<double>(lengths[mid - 1]) + static_cast<double>(lengths[mid])) / 2.0;
  report.lengths = stats;
  return report;
}

std::string StatReport::to_string() const {
  std::ostringstream out;
  out << "cases: " << cases << '\n'
      << "activity instances: " << activity_instances << '\n'
      << "trace variants: " << variants << '\n'
      << "unique activities: " << unique_activities << '\n';
  if (lengths) {
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.2f", lengths->mean);
    out << "max case length: " << lengths->max << '\n'
        << "min case length: " << lengths->min << '\n'
        << "mean case length: " << mean << '\n'
        << "median case length: " << lengths->median << '\n';
  } else {
    out << "case length: n/a\n";
  }
  return out.str();
}

}  // namespace pelp
