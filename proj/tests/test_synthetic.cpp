#include <doctest.h>

#include <set>

#include "pelp/error.hpp"
#include "pelp/synthetic.hpp"

using namespace pelp;

namespace {

// Independent periodicity oracle: trace i must equal trace i - period, and
// the first period must be the variants in blocks of `repeat`.
bool periodic_oracle(const EventLog& log, const std::vector<Activities>& variants, std::size_t repeat) {
  const std::size_t period = variants.size() * repeat;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& expected = i < period ? variants[i / repeat] : log[i - period].activities;
    if (log[i].activities != expected) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generate parallel season of length 2") {
  const auto log = generate(family_spec("parallel", 2), 8);
  const Activities abcd{"a", "b", "c", "d"}, acbd{"a", "c", "b", "d"};
  CHECK(log.sequences() == std::vector<Activities>{abcd, abcd, acbd, acbd, abcd, abcd, acbd, acbd});
}

TEST_CASE("three-variant season") {
  const auto spec = family_spec("tri1", 2);
  const auto log = generate(spec, spec.period());
  CHECK(log.size() == 6);
  CHECK(log.sequences() ==
        std::vector<Activities>{{"a", "b", "c"}, {"a", "b", "c"}, {"a", "b", "b", "c"}, {"a", "b", "b", "c"}, {"a", "c"}, {"a", "c"}});
}

TEST_CASE("generate errors and truncation") {
  SeasonSpec empty;
  CHECK_THROWS_AS(generate(empty, 10), ConfigError);
  CHECK_THROWS_AS(generate(family_spec("skip", 3), 5), ConfigError);
  CHECK_THROWS_AS(family_spec("skip", 6), ConfigError);
  CHECK_THROWS_AS(family_spec("spiral", 2), ConfigError);
  const auto spec = family_spec("longloop", 3);
  CHECK(generate(spec, 7).size() == 7);
  CHECK(generate(spec, 7).sequences() == generate(spec, 7).sequences());
}

TEST_CASE("standard suite") {
  const auto suite = standard_suite();
  REQUIRE(suite.size() == 18);
  std::set<std::string> names;
  for (const auto& e : suite) {
    names.insert(e.name);
    CHECK(e.log.size() == kSuitePeriods * e.spec.period());
    CHECK(is_periodic(e.log, e.spec));
    CHECK(periodic_oracle(e.log, e.spec.variants, e.spec.repeat));
    const auto family = family_spec(e.family, e.spec.repeat);
    std::set<Activities> allowed(family.variants.begin(), family.variants.end());
    for (const auto& t : e.log.traces()) CHECK(allowed.count(t.activities));
  }
  CHECK(names.size() == 18);
  CHECK(names.count("parallel-r2"));
  CHECK(names.count("skip-r5"));
  CHECK(names.count("tri1-r2"));
  CHECK(names.count("tri2-r3"));

  auto broken = suite[0].log.sequences();
  std::swap(broken[0], broken[suite[0].spec.repeat]);
  CHECK_FALSE(is_periodic(EventLog::from_sequences(broken), suite[0].spec));
}
