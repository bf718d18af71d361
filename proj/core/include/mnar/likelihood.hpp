#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mnar/model_space.hpp"
#include "mnar/table.hpp"

namespace mnar {

/// Odds of missingness for one missing-capable variable.
struct OddsVector {
  int dependency = -1;         // variable index; -1 for a constant (MCAR)
  std::vector<double> values;  // one per level of the dependency, or a single value
};

/// Baseline counts m over all cells (row-major, declaration order), one odds
/// vector per missing-capable variable, and association parameters indexed by
/// response-pattern index (only patterns with two or more missing entries are
/// meaningful; the rest stay at 1).
struct ModelParameters {
  std::vector<double> baseline;
  std::vector<OddsVector> odds;
  std::vector<double> assoc;

  [[nodiscard]] double theta(std::size_t pattern_index) const { return assoc[pattern_index]; }
};

/// Binds a table to a mechanism spec and caches the index maps the
/// likelihood needs. Holds a reference: the table must outlive it.
class LikelihoodSpec {
 public:
  LikelihoodSpec(const IncompleteTable& table, MechanismSpec spec);

  [[nodiscard]] const IncompleteTable& table() const { return *table_; }
  [[nodiscard]] const MechanismSpec& spec() const { return spec_; }
  [[nodiscard]] int k() const { return spec_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return table_->num_cells(); }
  [[nodiscard]] std::size_t num_patterns() const { return table_->num_patterns(); }

  /// Offset of each full cell inside the block for `pattern`.
  [[nodiscard]] const std::vector<std::size_t>& block_map(std::size_t pattern) const {
    return block_maps_[pattern];
  }
  /// Level of the odds dependency of missing position p at each cell (0 for MCAR).
  [[nodiscard]] const std::vector<int>& dependency_levels(int p) const { return dep_levels_[p]; }

  /// Multiplier w_r(c) with mu_{c,r} = m_c * w_r(c).
  [[nodiscard]] std::vector<double> weights(const ModelParameters& params,
                                            std::size_t pattern) const;
  [[nodiscard]] double odds_at(const ModelParameters& params, int p, std::size_t cell) const {
    return params.odds[p].values[dep_levels_[p][cell]];
  }

  /// Parameters with the right shapes: m = 1, odds = 1, theta = 1.
  [[nodiscard]] ModelParameters unit_parameters() const;
  /// m = fully observed counts (+0.5 on zeros), odds = supplementary mass over
  /// fully observed mass, theta = 1.
  [[nodiscard]] ModelParameters default_start() const;
  /// Throws ValidationError when shapes do not match the spec.
  void check_shape(const ModelParameters& params) const;

  [[nodiscard]] long long parameter_count() const;

 private:
  const IncompleteTable* table_;
  MechanismSpec spec_;
  std::vector<std::vector<std::size_t>> block_maps_;
  std::vector<std::vector<int>> dep_levels_;
};

/// mu_{c,r} for every pattern r (outer) and full cell c (inner).
std::vector<std::vector<double>> expected_cells(const LikelihoodSpec& ls,
                                                const ModelParameters& params);

/// Expected counts laid out like each observed block.
std::vector<std::vector<double>> expected_margins(const LikelihoodSpec& ls,
                                                  const ModelParameters& params);

/// Poisson kernel: sum over blocks of y log(expected margin) minus the sum of
/// all expected cells. Cells with y = 0 skip the log term. Returns -infinity
/// when some expected margin is 0 where y > 0.
double loglik(const LikelihoodSpec& ls, const ModelParameters& params);

/// Same kernel evaluated at the saturated fit (expected = observed).
double perfect_fit_loglik(const IncompleteTable& table);

struct EmOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  bool record_trace = false;
};

struct EmTraceStep {
  int iteration = 0;
  double loglik = 0.0;
  double completed_total = 0.0;
};

struct EmResult {
  ModelParameters params;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
  std::vector<EmTraceStep> trace;
};

/// Expectation / conditional maximization. Each sweep updates m, then each
/// odds vector, then the association parameters, each in closed form given
/// the others, so the likelihood cannot decrease. Odds components that are
/// exactly 0 stay 0. Stops when the relative loglik change drops below tol.
EmResult em_fit(const LikelihoodSpec& ls, std::optional<ModelParameters> start = std::nullopt,
                const EmOptions& options = {});

}  // namespace mnar
