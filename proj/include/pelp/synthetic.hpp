#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pelp/eventlog.hpp"

namespace pelp {

/// Cyclic season: variant 1 repeated `repeat` times, then variant 2, and so
/// on, then from the start again.
struct SeasonSpec {
  std::vector<Activities> variants;
  std::size_t repeat = 2;

  static constexpr std::size_t kMinRepeat = 2, kMaxRepeat = 5;

  std::size_t period() const noexcept { return variants.size() * repeat; }
  /// Variant expected at trace position i.
  const Activities& at(std::size_t i) const { return variants[(i % period()) / repeat]; }
  /// Throws ConfigError for an empty variant list, an empty variant or a
  /// repeat count outside [2, 5].
  void validate() const;
};

/// The first `total` traces of the cycle. Throws ConfigError when total is
/// shorter than one period.
EventLog generate(const SeasonSpec& spec, std::size_t total);

/// Names accepted by family_spec.
const std::vector<std::string>& family_names();
/// parallel, longloop, shortloop and skip take any season length in [2, 5];
/// tri1 and tri2 are three-variant patterns.
SeasonSpec family_spec(std::string_view family, std::size_t repeat);

/// True when every trace equals the variant the spec places at its position.
bool is_periodic(const EventLog& log, const SeasonSpec& spec);

struct SuiteEntry {
  std::string name;    // e.g. "parallel-r3"
  std::string family;
  SeasonSpec spec;
  EventLog log;
};

inline constexpr std::size_t kSuitePeriods = 40;

/// 4 two-variant families x season lengths 2..5, plus tri1 (r = 2) and
/// tri2 (r = 3): 18 logs of exactly `periods` periods each.
std::vector<SuiteEntry> standard_suite(std::size_t periods = kSuitePeriods);

}  // namespace pelp
