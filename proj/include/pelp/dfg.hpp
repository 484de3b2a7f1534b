#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pelp/eventlog.hpp"

namespace pelp {

/// Directly-follows frequencies over a sorted activity universe. Entry
/// (i, j) counts how often universe[i] is immediately followed by universe[j].
/// No artificial start/end nodes.
class DfMatrix {
 public:
  DfMatrix() = default;
  /// Zero matrix over `universe` (sorted and deduplicated on construction).
  explicit DfMatrix(std::vector<std::string> universe);

  std::size_t size() const noexcept { return universe_.size(); }
  const std::vector<std::string>& universe() const noexcept { return universe_; }

  std::uint64_t at(std::size_t row, std::size_t col) const { return counts_[row * size() + col]; }
  std::uint64_t& at(std::size_t row, std::size_t col) { return counts_[row * size() + col]; }
  /// Count for the label pair; 0 when either label is outside the universe.
  std::uint64_t count(const std::string& from, const std::string& to) const;
  std::optional<std::size_t> index_of(const std::string& label) const;

  std::uint64_t total() const;
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  bool operator==(const DfMatrix&) const = default;

 private:
  std::vector<std::string> universe_;
  std::vector<std::uint64_t> counts_;
};

/// Counts adjacent activity pairs over all traces. When `universe` is given
/// it must contain every activity of the log (ContractError otherwise).
DfMatrix df_matrix(const EventLog& log, const std::optional<std::vector<std::string>>& universe = std::nullopt);

/// Re-indexes both matrices over the sorted union of their universes.
std::pair<DfMatrix, DfMatrix> align(const DfMatrix& a, const DfMatrix& b);

/// Root mean square and mean absolute difference over all n*n cells. Both
/// matrices must share a universe (ContractError otherwise).
double rmse(const DfMatrix& x, const DfMatrix& y);
double mae(const DfMatrix& x, const DfMatrix& y);

struct LogDistance {
  double rmse = 0.0;
  double mae = 0.0;
};

/// df_matrix of both logs, align, then rmse/mae.
LogDistance compare_logs(const EventLog& predicted, const EventLog& truth);

/// CSV with a header row and a header column of activity labels.
std::string to_csv(const DfMatrix& m);
void write_csv(const DfMatrix& m, const std::filesystem::path& path);

}  // namespace pelp
