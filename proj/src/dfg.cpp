#include "pelp/dfg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pelp/error.hpp"

namespace pelp {

DfMatrix::DfMatrix(std::vector<std::string> universe) : universe_(std::move(universe)) {
  std::sort(universe_.begin(), universe_.end());
  universe_.erase(std::unique(universe_.begin(), universe_.end()), universe_.end());
  counts_.assign(universe_.size() * universe_.size(), 0);
}

std::optional<std::size_t> DfMatrix::index_of(const std::string& label) const {
  const auto it = std::lower_bound(universe_.begin(), universe_.end(), label);
  if (it == universe_.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - universe_.begin());
}

std::uint64_t DfMatrix::count(const std::string& from, const std::string& to) const {
  const auto i = index_of(from);
  const auto j = index_of(to);
  return i && j ? at(*i, *j) : 0;
}

std::uint64_t DfMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto c : counts_) sum += c;
  return sum;
}

DfMatrix df_matrix(const EventLog& log, const std::optional<std::vector<std::string>>& universe) {
  DfMatrix m(universe ? *universe : log.activity_universe());
  for (const auto& trace : log.traces()) {
    std::optional<std::size_t> prev;
    for (const auto& a : trace.activities) {
      const auto idx = m.index_of(a);
      if (!idx) throw ContractError("activity '" + a + "' is outside the supplied universe");
      if (prev) ++m.at(*prev, *idx);
      prev = idx;
    }
  }
  return m;
}

namespace {

DfMatrix reindex(const DfMatrix& m, const std::vector<std::string>& universe) {
  DfMatrix out(universe);
  std::vector<std::size_t> map(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) map[i] = *out.index_of(m.universe()[i]);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) out.at(map[i], map[j]) = m.at(i, j);
  }
  return out;
}

void require_aligned(const DfMatrix& x, const DfMatrix& y) {
  if (x.universe() != y.universe()) {
    throw ContractError("matrices are over different activity universes; align them first");
  }
}

}  // namespace

std::pair<DfMatrix, DfMatrix> align(const DfMatrix& a, const DfMatrix& b) {
  std::vector<std::string> universe;
  std::set_union(a.universe().begin(), a.universe().end(), b.universe().begin(), b.universe().end(),
                 std::back_inserter(universe));
  return {reindex(a, universe), reindex(b, universe)};
}

double rmse(const DfMatrix& x, const DfMatrix& y) {
  require_aligned(x, y);
  if (x.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < x.counts().size(); ++k) {
    const double d = static_cast<double>(x.counts()[k]) - static_cast<double>(y.counts()[k]);
    sum += d * d;
  }
  const double n = static_cast<double>(x.size());
  return std::sqrt(sum / (n * n));
}

double mae(const DfMatrix& x, const DfMatrix& y) {
  require_aligned(x, y);
  if (x.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < x.counts().size(); ++k) {
    sum += std::abs(static_cast<double>(x.counts()[k]) - static_cast<double>(y.counts()[k]));
  }
  const double n = static_cast<double>(x.size());
  return sum / (n * n);
}

LogDistance compare_logs(const EventLog& predicted, const EventLog& truth) {
  const auto [p, t] = align(df_matrix(predicted), df_matrix(truth));
  return {rmse(p, t), mae(p, t)};
}

std::string to_csv(const DfMatrix& m) {
  std::string out = "from\\to";
  for (const auto& label : m.universe()) out += "," + label;
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.universe()[i];
    for (std::size_t j = 0; j < m.size(); ++j) out += "," + std::to_string(m.at(i, j));
    out += '\n';
  }
  return out;
}

void write_csv(const DfMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_csv(m);
}

}  // namespace pelp
