#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mnar/estimators.hpp"
#include "mnar/table.hpp"

namespace mnar {

struct GoodnessOfFit {
  double g2 = 0.0;
  long long df = 0;
  /// Empty when df <= 0 (not testable against the perfect fit).
  std::optional<double> p_value;
  [[nodiscard]] bool testable() const { return df > 0; }
};

/// G^2 = -2 (loglik(fit) - loglik(perfect fit)).
GoodnessOfFit g_squared(const IncompleteTable& table, const FitResult& fit);

/// Upper tail of the chi-square distribution, Q(df/2, x/2).
double chi2_survival(double x, long long df);

/// Cell probabilities summed over response patterns, normalized to 1.
std::vector<double> joint_probabilities(const FitResult& fit);

/// odds / (1 + odds) for missing position p; `cell` supplies the level of the
/// odds dependency (other entries may be empty).
double conditional_missing_prob(const FitResult& fit, int position, const LevelAssignment& cell);

/// Odds ratio on the margin of the first two variables with every other
/// variable fixed at `rest` (0-based levels).
struct OddsRatioIndices {
  int i = 0, i2 = 1, j = 0, j2 = 1;
  std::vector<int> rest;
};

enum class VarianceMethod { FormulaObservedMargin, FormulaSecondMargin, FormulaFullyObserved, Delta };

std::string_view variance_method_name(VarianceMethod m);

struct OddsRatioEstimate {
  double value = 0.0;
  double variance = 0.0;
  OddsRatioIndices indices;
  bool invariant_equal_to_observed = false;
  VarianceMethod variance_method = VarianceMethod::Delta;
  std::vector<std::string> warnings;
};

/// Fully observed cross ratio y(i,j) y(i2,j2) / (y(i,j2) y(i2,j)) at `rest`.
double observed_odds_ratio(const IncompleteTable& table, const OddsRatioIndices& idx);

/// True when the marginal odds ratio must equal the fully observed one for
/// this spec (three variables, first two missing): models 2, 4, 9, 13, 16
/// always and 3, 5, 6, 11 for interior fits.
bool odds_ratio_invariant(const FitResult& fit, int n);

OddsRatioEstimate marginal_odds_ratio(const IncompleteTable& table, const FitResult& fit,
                                      const OddsRatioIndices& idx,
                                      const FitOptions& options = {});

/// Group formulas for three variables with the first two missing (models
/// 2-4, 5/9/13, 6/11/16, interior fits); the delta method elsewhere.
double odds_ratio_variance(const IncompleteTable& table, const FitResult& fit,
                           const OddsRatioIndices& idx, const FitOptions& options = {},
                           VarianceMethod* used = nullptr);

/// Delta method: sum over every observed count of (dOR/dy)^2 times its
/// expected margin, with derivatives from refitting the perturbed table.
double odds_ratio_variance_delta(const IncompleteTable& table, const FitResult& fit,
                                 const OddsRatioIndices& idx, const FitOptions& options = {});

}  // namespace mnar
