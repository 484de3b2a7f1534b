#include "pelp/synthetic.hpp"

#include "pelp/error.hpp"

namespace pelp {

void SeasonSpec::validate() const {
  if (variants.empty()) throw ConfigError("season needs at least one variant");
  for (const auto& v : variants) {
    if (v.empty()) throw ConfigError("season variants must be non-empty");
  }
  if (repeat < kMinRepeat || repeat > kMaxRepeat) {
    throw ConfigError("season repeat must lie in [2, 5], got " + std::to_string(repeat));
  }
}

EventLog generate(const SeasonSpec& spec, std::size_t total) {
  spec.validate();
  if (total < spec.period()) {
    throw ConfigError("total " + std::to_string(total) + " is shorter than one period (" +
                      std::to_string(spec.period()) + ")");
  }
  std::vector<Activities> traces;
  traces.reserve(total);
  for (std::size_t i = 0; i < total; ++i) traces.push_back(spec.at(i));
  return EventLog::from_sequences(std::move(traces));
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"parallel", "longloop", "shortloop", "skip", "tri1", "tri2"};
  return names;
}

SeasonSpec family_spec(std::string_view family, std::size_t repeat) {
  SeasonSpec s;
  s.repeat = repeat;
  if (family == "parallel") {
    s.variants = {{"a", "b", "c", "d"}, {"a", "c", "b", "d"}};
  } else if (family == "longloop") {
    s.variants = {{"a", "b", "c", "d"}, {"a", "b", "c", "b", "c", "d"}};
  } else if (family == "shortloop") {
    s.variants = {{"a", "b", "d"}, {"a", "b", "b", "d"}};
  } else if (family == "skip") {
    s.variants = {{"a", "b", "d"}, {"a", "d"}};
  } else if (family == "tri1") {
    s.variants = {{"a", "b", "c"}, {"a", "b", "b", "c"}, {"a", "c"}};
  } else if (family == "tri2") {
    s.variants = {{"a", "b", "c", "d"}, {"a", "b", "c", "b", "c", "d"}, {"a", "b", "d"}};
  } else {
    throw ConfigError("unknown synthetic family '" + std::string(family) + "'");
  }
  s.validate();
  return s;
}

bool is_periodic(const EventLog& log, const SeasonSpec& spec) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].activities != spec.at(i)) return false;
  }
  return true;
}

std::vector<SuiteEntry> standard_suite(std::size_t periods) {
  std::vector<SuiteEntry> suite;
  auto add = [&](const std::string& family, std::size_t r) {
    auto spec = family_spec(family, r);
    auto log = generate(spec, periods * spec.period());
    suite.push_back({family + "-r" + std::to_string(r), family, std::move(spec), std::move(log)});
  };
  for (const char* family : {"parallel", "longloop", "shortloop", "skip"}) {
    for (std::size_t r = 2; r <= 5; ++r) add(family, r);
  }
  add("tri1", 2);
  add("tri2", 3);
  return suite;
}

}  // namespace pelp
