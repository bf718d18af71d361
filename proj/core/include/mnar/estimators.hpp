#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mnar/likelihood.hpp"
#include "mnar/linear_solve.hpp"
#include "mnar/model_space.hpp"
#include "mnar/table.hpp"

namespace mnar {

enum class FitMethod { ClosedForm, EM, Boundary };

std::string_view method_name(FitMethod m);

struct BoundaryCandidate {
  int variable = -1;
  std::vector<int> zero_levels;
  double loglik = 0.0;
  double g2 = 0.0;
};

struct BoundaryReport {
  int variable = -1;  // variable index whose odds were pinned
  std::vector<int> zero_levels;
  std::vector<BoundaryCandidate> candidates;
};

struct FitOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  /// Three-missing fits are re-run through EM; when EM gains more than
  /// guard_threshold the EM fit is returned instead.
  bool polish_guard = true;
  double guard_threshold = 1e-6;
  /// Skip closed forms and maximize by EM for every spec.
  bool force_em = false;
};

struct FitResult {
  MechanismSpec spec;
  std::vector<int> levels;
  ModelParameters params;
  /// mu for every pattern (outer, binary order) and full cell (inner).
  std::vector<std::vector<double>> expected;
  double loglik = 0.0;
  FitMethod method = FitMethod::ClosedForm;
  std::optional<BoundaryReport> boundary;
  std::vector<std::string> warnings;
  int iterations = 0;
  bool converged = true;

  [[nodiscard]] const std::vector<double>& baseline() const { return params.baseline; }
  [[nodiscard]] double expected_total() const;
  [[nodiscard]] bool is_boundary() const { return boundary.has_value(); }
};

/// Dispatches on the number of missing-capable variables: closed forms for
/// one to three, EM for all-MCAR specs with k >= 3 and for k >= 4.
FitResult fit(const IncompleteTable& table, const MechanismSpec& spec,
              const FitOptions& options = {});

FitResult fit_one_missing(const IncompleteTable& table, const MechanismSpec& spec,
                          const FitOptions& options = {});
FitResult fit_two_missing(const IncompleteTable& table, const MechanismSpec& spec,
                          const FitOptions& options = {});
FitResult fit_three_missing(const IncompleteTable& table, const MechanismSpec& spec,
                            const FitOptions& options = {});

/// EM from the default start.
FitResult fit_em(const IncompleteTable& table, const MechanismSpec& spec,
                 const FitOptions& options = {});

/// Closed-form parameters before any boundary handling. NMAR odds may be
/// negative; association parameters are then NaN. Requires 1 <= k <= 3 and a spec that is not all-MCAR for k >= 2.
ModelParameters closed_form_parameters(const IncompleteTable& table, const MechanismSpec& spec);

/// Pins negative NMAR odds to zero and refits the remaining parameters.
/// `unconstrained` is the closed-form parameter set holding the negatives.
FitResult resolve_boundary(const IncompleteTable& table, const MechanismSpec& spec,
                           const ModelParameters& unconstrained,
                           const FitOptions& options = {});

/// Builds a FitResult (expected table, loglik) from a parameter set.
FitResult make_fit_result(const LikelihoodSpec& ls, ModelParameters params, FitMethod method);

/// Components below this are negative; those in [-kNegativeTolerance, 0) are clamped to 0.
inline constexpr double kNegativeTolerance = 1e-12;

}  // namespace mnar
