#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnar/indexing.hpp"

namespace mnar {

struct VariableMeta {
  std::string name;
  int levels = 2;
  bool missing_capable = false;
};

enum class Response : std::uint8_t { Observed = 0, Missing = 1 };

/// Observed/missing status of each missing-capable variable, in declaration
/// order. Patterns enumerate in binary order with Missing = 1 and the last
/// entry varying fastest.
class ResponsePattern {
 public:
  ResponsePattern() = default;
  explicit ResponsePattern(std::vector<Response> entries)
      : entries_(std::move(entries)) {}

  static ResponsePattern from_index(int k, std::size_t index);
  static ResponsePattern all_observed(int k) {
    return ResponsePattern(std::vector<Response>(k, Response::Observed));
  }

  [[nodiscard]] int size() const { return static_cast<int>(entries_.size()); }
  [[nodiscard]] bool missing(int position) const {
    return entries_[position] == Response::Missing;
  }
  [[nodiscard]] int missing_count() const;
  [[nodiscard]] std::size_t index() const;
  [[nodiscard]] const std::vector<Response>& entries() const { return entries_; }

  bool operator==(const ResponsePattern&) const = default;

 private:
  std::vector<Response> entries_;
};

/// True when the missing-capable variable at `position` is missing under the
/// pattern with the given binary index.
inline bool pattern_has(std::size_t pattern_index, int position, int k) {
  return ((pattern_index >> (k - 1 - position)) & 1U) != 0;
}

/// Counts for one response pattern, over the variables observed under it.
struct ObservedBlock {
  ResponsePattern pattern;
  std::vector<int> axes;  // observed variable indices, declaration order
  std::vector<double> counts;

  [[nodiscard]] double total() const;
};

/// One level per variable (0-based); nullopt leaves the variable free.
using LevelAssignment = std::vector<std::optional<int>>;

/// A multiway table partitioned by response pattern. Immutable once built.
class IncompleteTable {
 public:
  /// Validates and takes ownership. Blocks may arrive in any order; they are
  /// stored by pattern index. Axes are derived from the patterns, so only the
  /// pattern and counts of each block need to be filled in.
  IncompleteTable(std::vector<VariableMeta> variables,
                  std::vector<ObservedBlock> blocks);

  /// Convenience constructor: counts[pattern_index] is the row-major array
  /// over the variables observed under that pattern.
  static IncompleteTable from_counts(std::vector<VariableMeta> variables,
                                     std::vector<std::vector<double>> counts);

  [[nodiscard]] const std::vector<VariableMeta>& variables() const { return variables_; }
  [[nodiscard]] int num_variables() const { return static_cast<int>(variables_.size()); }
  [[nodiscard]] const std::vector<int>& levels() const { return levels_; }
  [[nodiscard]] std::size_t num_cells() const { return cell_shape_.size(); }
  [[nodiscard]] const Shape& cell_shape() const { return cell_shape_; }

  /// Indices of the missing-capable variables, declaration order.
  [[nodiscard]] const std::vector<int>& missing_variables() const { return missing_; }
  [[nodiscard]] int num_missing() const { return static_cast<int>(missing_.size()); }
  [[nodiscard]] std::size_t num_patterns() const { return blocks_.size(); }
  /// Position of `variable` among the missing-capable variables, or -1.
  [[nodiscard]] int missing_position(int variable) const;
  [[nodiscard]] bool observed_under(std::size_t pattern_index, int variable) const;

  [[nodiscard]] const std::vector<ObservedBlock>& blocks() const { return blocks_; }
  [[nodiscard]] const ObservedBlock& block(std::size_t pattern_index) const {
    return blocks_[pattern_index];
  }
  [[nodiscard]] const ObservedBlock& block(const ResponsePattern& pattern) const;
  [[nodiscard]] const ObservedBlock& fully_observed() const { return blocks_.front(); }

  [[nodiscard]] double total() const { return total_; }
  [[nodiscard]] int variable_index(std::string_view name) const;
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

  /// Sum of a block over everything except `keep` (variables observed under
  /// the pattern, any order; the result is laid out in sorted order).
  [[nodiscard]] std::vector<double> block_margin(std::size_t pattern_index,
                                                 std::vector<int> keep) const;

 private:
  std::vector<VariableMeta> variables_;
  std::vector<int> levels_;
  std::vector<int> missing_;
  Shape cell_shape_;
  std::vector<ObservedBlock> blocks_;
  double total_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Observed variables under a pattern, declaration order.
std::vector<int> observed_axes(const std::vector<VariableMeta>& variables,
                               const ResponsePattern& pattern);

/// Sum of the block for `pattern` over every variable not fixed in `fixed`.
double margin_sum(const IncompleteTable& table, const ResponsePattern& pattern,
                  const LevelAssignment& fixed);

/// Restricts the missing-capable set to `keep`. Only blocks in which every
/// dropped variable is observed survive; dropped variables become always
/// observed.
IncompleteTable extract_subtable(const IncompleteTable& table,
                                 const std::vector<int>& keep);
IncompleteTable extract_subtable(const IncompleteTable& table,
                                 const std::vector<std::string>& keep);

}  // namespace mnar
