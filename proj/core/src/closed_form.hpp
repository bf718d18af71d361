#pragma once

#include <cstddef>
#include <vector>

#include "mnar/likelihood.hpp"
#include "mnar/linear_solve.hpp"

namespace mnar::detail {

/// Margins and totals shared by the closed-form and boundary estimators.
class ClosedFormContext {
 public:
  explicit ClosedFormContext(const LikelihoodSpec& ls);

  [[nodiscard]] const LikelihoodSpec& ls() const { return *ls_; }
  [[nodiscard]] int k() const { return ls_->k(); }
  [[nodiscard]] const std::vector<int>& levels() const { return ls_->table().levels(); }
  [[nodiscard]] const std::vector<double>& y() const { return ls_->table().fully_observed().counts; }
  [[nodiscard]] double total(std::size_t pattern) const { return totals_[pattern]; }
  [[nodiscard]] std::size_t single(int p) const { return std::size_t{1} << (k() - 1 - p); }
  [[nodiscard]] std::size_t pair(int p, int q) const { return single(p) | single(q); }
  [[nodiscard]] int variable(int p) const { return ls_->spec().variables[p]; }

  /// Sum of a full-cell array over everything except `var`.
  [[nodiscard]] std::vector<double> by_level(const std::vector<double>& full, int var) const;
  /// Margin of a block over one of its observed variables.
  [[nodiscard]] std::vector<double> block_by_level(std::size_t pattern, int var) const;
  /// Level of `var` at every full cell.
  [[nodiscard]] const std::vector<int>& level_of(int var) const { return level_of_[var]; }

  /// Per-cell factor (y + y_p)/y * T0/(T0 + T_p) applied for an MCAR variable.
  [[nodiscard]] std::vector<double> mcar_factor(int p) const;
  /// Per-cell factor for a single MAR(t) variable when k = 1.
  [[nodiscard]] std::vector<double> mar_factor(int p, int target) const;

  /// A(row, level) = m at the cell; rows follow the single-missing block of p.
  [[nodiscard]] OddsSystem odds_system(int p, const std::vector<double>& m) const;
  /// Solves with the columns listed in `pinned` forced to 0.
  [[nodiscard]] std::vector<double> solve_reduced(int p, const std::vector<double>& m,
                                                  const std::vector<bool>& pinned) const;

  /// MCAR and MAR odds in closed form; NMAR odds from the odds system.
  [[nodiscard]] std::vector<double> odds(int p, const std::vector<double>& m) const;
  /// Association parameters by the ratio rules given m and odds.
  void fill_association(ModelParameters& params) const;

 private:
  const LikelihoodSpec* ls_;
  std::vector<double> totals_;
  std::vector<std::vector<int>> level_of_;
};

}  // namespace mnar::detail
