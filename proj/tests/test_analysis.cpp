#include <doctest.h>

#include <cmath>
#include <random>

#include "pelp/analysis.hpp"
#include "pelp/error.hpp"
#include "pelp/synthetic.hpp"

using namespace pelp;

namespace {

EventLog log_l_repeated(std::size_t times) {
  std::vector<Activities> seqs;
  for (std::size_t i = 0; i < times; ++i) {
    seqs.push_back({"a", "b", "c"});
    seqs.push_back({"a", "b", "b", "d"});
  }
  return EventLog::from_sequences(seqs);
}

}  // namespace

TEST_CASE("df_series") {
  const auto l = log_l_repeated(200);
  const auto s = df_series(l, "a", "b", 200);
  CHECK(s.values.size() == l.size() - 200 + 1);
  for (const double v : s.values) CHECK(v == 200.0);

  const auto constant = df_series(EventLog::from_sequences(std::vector<Activities>(50, {"x", "y"})), "x", "y", 10);
  for (const double v : constant.values) CHECK(v == 10.0);

  const auto absent = df_series(l, "d", "a", 50);
  for (const double v : absent.values) CHECK(v == 0.0);

  CHECK_THROWS_AS(df_series(l, "a", "b", l.size() + 1), ConfigError);
  CHECK_THROWS_AS(df_series(l, "a", "b", 0), ConfigError);
  CHECK(df_series(l, "a", "b", 10, 3).values.size() == (l.size() - 10) / 3 + 1);
}

TEST_CASE("series length law") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const std::size_t T = 1 + rng() % 300;
    const std::size_t w = 1 + rng() % T;
    const auto log = generate(family_spec("skip", 2), std::max<std::size_t>(T, 4)).slice(0, T);
    CHECK(df_series(log, "a", "b", w).values.size() == T - w + 1);
  }
}

TEST_CASE("autocorrelation") {
  SUBCASE("lag zero is one") {
    const std::vector<double> v{1, 4, 2, 8, 5, 7};
    const auto r = autocorrelation(v, 3);
    CHECK(r.r[0] == 1.0);
    CHECK_FALSE(r.degenerate);
    for (const double x : r.r) CHECK(std::abs(x) <= 1.0 + 1e-12);
  }
  SUBCASE("periodic series peaks at its period") {
    std::vector<double> v;
    for (int i = 0; i < 100; ++i) v.push_back(static_cast<double>((i * 7) % 5) + (i % 5 == 2 ? 0.5 : 0.0));
    const auto r = autocorrelation(v, 15);
    CHECK(std::abs(r.r[5] - 1.0) < 1e-9);
    CHECK(std::abs(r.r[10] - 1.0) < 1e-9);
    CHECK(r.r[1] < 0.9);
  }
  SUBCASE("white noise is uncorrelated") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    std::vector<double> v(10000);
    for (auto& x : v) x = nd(rng);
    const auto r = autocorrelation(v, 20);
    for (std::size_t k = 1; k <= 20; ++k) CHECK(std::abs(r.r[k]) < 0.05);
  }
  SUBCASE("constant series is degenerate") {
    const std::vector<double> v(30, 2.0);
    const auto r = autocorrelation(v, 5);
    CHECK(r.degenerate);
    for (const double x : r.r) CHECK(x == 1.0);
  }
  SUBCASE("lag must be shorter than the series") {
    const std::vector<double> v{1, 2, 3};
    CHECK_THROWS_AS(autocorrelation(v, 3), ConfigError);
  }
}

TEST_CASE("autocorr_report") {
  const auto log = generate(family_spec("parallel", 3), 120);
  const auto report = autocorr_report(log, 20, 10);
  CHECK(report.size() == 16);
  CHECK(report[0].from == "a");
  CHECK(report[0].to == "a");
  CHECK(report[0].degenerate);  // a -> a never happens
  bool any_live = false;
  for (const auto& s : report) {
    if (s.from == "b" && s.to == "c") {
      any_live = true;
      CHECK_FALSE(s.degenerate);
    }
  }
  CHECK(any_live);
  const auto csv = report_csv(report, log.activity_universe());
  CHECK(csv.rfind("from\\to,a,b,c,d\n", 0) == 0);
  CHECK(csv.find("degenerate") != std::string::npos);
}
