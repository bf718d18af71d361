#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mnar/estimators.hpp"
#include "mnar/inference.hpp"

namespace mnar {

struct ComparisonRow {
  MechanismSpec spec;
  std::string model;     // CLI syntax
  std::string notation;  // conventional notation
  std::string category;
  std::size_t number = 0;  // position in enumeration order, 1-based
  long long parameters = 0;
  bool boundary = false;
  std::string method;
  double loglik = 0.0;
  double g2 = 0.0;
  long long df = 0;
  std::optional<double> p_value;
  std::optional<std::string> error;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // sorted by model label
  std::optional<std::size_t> best;  // index into rows

  [[nodiscard]] const ComparisonRow& best_row() const;
};

/// Fits every enumerated model (in parallel) and picks the minimal G^2, ties
/// broken by fewer parameters, then by label. A failing fit is recorded in
/// its row.
ComparisonReport compare_models(const IncompleteTable& table, const FitOptions& options = {});

}  // namespace mnar
