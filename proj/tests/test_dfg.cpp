#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "pelp/dfg.hpp"
#include "pelp/error.hpp"

using namespace pelp;

namespace {

EventLog two_traces() { return EventLog::from_sequences({{"a", "b", "c"}, {"a", "b", "b", "d"}}); }

// Brute-force pair counter keyed by label.
std::map<std::pair<std::string, std::string>, std::uint64_t> brute_pairs(const EventLog& log) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> m;
  for (const auto& t : log.traces()) {
    for (std::size_t i = 1; i < t.activities.size(); ++i) ++m[{t.activities[i - 1], t.activities[i]}];
  }
  return m;
}

DfMatrix random_matrix(std::mt19937_64& rng, const std::vector<std::string>& universe) {
  DfMatrix m(universe);
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m.size(); ++c) m.at(r, c) = rng() % 7;
  }
  return m;
}

}  // namespace

TEST_CASE("df_matrix of the two-trace log") {
  const auto m = df_matrix(two_traces());
  CHECK(m.universe() == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(m.count("a", "b") == 2);
  CHECK(m.count("b", "b") == 1);
  CHECK(m.count("b", "c") == 1);
  CHECK(m.count("b", "d") == 1);
  CHECK(m.total() == 5);
  CHECK(m.count("a", "zz") == 0);
}

TEST_CASE("df_matrix small cases") {
  const auto single = df_matrix(EventLog::from_sequences({{"a"}}));
  CHECK(single.size() == 1);
  CHECK(single.at(0, 0) == 0);

  const auto three = df_matrix(EventLog::from_sequences({{"a", "b", "c"}, {"a", "b", "b", "d"}, {"a", "b", "b", "d"}}));
  CHECK(three.count("a", "b") == 3);
  CHECK(three.count("b", "b") == 2);
  CHECK(three.count("b", "c") == 1);
  CHECK(three.count("b", "d") == 2);

  CHECK_THROWS_AS(df_matrix(two_traces(), std::vector<std::string>{"a", "b", "c"}), ContractError);
  const auto wide = df_matrix(two_traces(), std::vector<std::string>{"e", "d", "c", "b", "a"});
  CHECK(wide.universe() == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(wide.count("a", "b") == 2);
}

TEST_CASE("df_matrix agrees with brute-force counting and conserves pairs") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 40; ++round) {
    std::vector<Activities> seqs;
    std::size_t expected_total = 0;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      Activities a;
      const std::size_t len = 1 + rng() % 6;
      for (std::size_t k = 0; k < len; ++k) a.push_back(std::string(1, static_cast<char>('a' + rng() % 5)));
      expected_total += len - 1;
      seqs.push_back(a);
    }
    const auto log = EventLog::from_sequences(seqs);
    const auto m = df_matrix(log);
    CHECK(m.total() == expected_total);
    std::uint64_t matched = 0;
    for (const auto& [key, count] : brute_pairs(log)) {
      CHECK(m.count(key.first, key.second) == count);
      matched += count;
    }
    CHECK(matched == m.total());
  }
}

TEST_CASE("align") {
  DfMatrix ab({"a", "b"}), bc({"b", "c"});
  ab.at(0, 1) = 4;
  bc.at(1, 0) = 2;
  const auto [x, y] = align(ab, bc);
  CHECK(x.universe() == std::vector<std::string>{"a", "b", "c"});
  CHECK(y.universe() == x.universe());
  CHECK(x.count("a", "b") == 4);
  CHECK(y.count("c", "b") == 2);
  CHECK(x.total() == 4);
  CHECK(y.total() == 2);

  const auto [same1, same2] = align(ab, ab);
  CHECK(same1 == ab);
  CHECK(same2 == ab);

  DfMatrix a({"a"}), b({"b"});
  a.at(0, 0) = 1;
  b.at(0, 0) = 5;
  const auto [pa, pb] = align(a, b);
  CHECK(pa.size() == 2);
  CHECK(pa.at(0, 0) == 1);
  CHECK(pa.at(1, 1) == 0);
  CHECK(pb.at(1, 1) == 5);
  CHECK(pb.at(0, 0) == 0);
}

TEST_CASE("rmse and mae") {
  const auto m = df_matrix(two_traces());
  CHECK(rmse(m, m) == 0.0);
  CHECK(mae(m, m) == 0.0);
  const DfMatrix zero(m.universe());
  CHECK(rmse(m, zero) == doctest::Approx(std::sqrt(7.0) / 4.0).epsilon(1e-14));
  CHECK(std::abs(rmse(m, zero) - 0.661438) < 1e-6);
  CHECK(mae(m, zero) == doctest::Approx(5.0 / 16.0).epsilon(1e-14));

  DfMatrix x({"a"}), y({"a"});
  x.at(0, 0) = 3;
  y.at(0, 0) = 1;
  CHECK(rmse(x, y) == 2.0);
  CHECK(mae(x, y) == 2.0);

  CHECK_THROWS_AS(rmse(m, DfMatrix({"a", "b"})), ContractError);
  CHECK_THROWS_AS(mae(m, DfMatrix({"a", "b"})), ContractError);
}

TEST_CASE("metric properties over random matrices") {
  std::mt19937_64 rng(5);
  const std::vector<std::string> u{"a", "b", "c"};
  for (int i = 0; i < 2000; ++i) {
    const auto x = random_matrix(rng, u), y = random_matrix(rng, u);
    CHECK(rmse(x, y) == rmse(y, x));
    CHECK(mae(x, y) == mae(y, x));
    CHECK(rmse(x, y) >= mae(x, y) - 1e-12);
  }
  // padding both matrices over a common superset keeps the sums; the
  // metrics then change only by the n^2 normalisation
  DfMatrix p({"a", "b"}), q({"b", "c"});
  p.at(0, 1) = 3;
  q.at(0, 1) = 1;
  const auto [p1, q1] = align(p, q);
  const auto [zero, p2] = align(df_matrix(EventLog{}, p1.universe()), p1);
  CHECK(p2 == p1);
  CHECK(zero.total() == 0);
  CHECK(rmse(p1, q1) == doctest::Approx(std::sqrt((9.0 + 1.0) / 9.0)));
}

TEST_CASE("compare_logs and csv export") {
  const auto d = compare_logs(two_traces(), two_traces());
  CHECK(d.rmse == 0.0);
  CHECK(d.mae == 0.0);
  const auto csv = to_csv(df_matrix(two_traces()));
  CHECK(csv.rfind("from\\to,a,b,c,d\n", 0) == 0);
  CHECK(csv.find("a,0,2,0,0\n") != std::string::npos);
  CHECK(csv.find("b,0,1,1,1\n") != std::string::npos);
}
