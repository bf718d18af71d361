#pragma once

#include <string>
#include <vector>

#include "mnar/estimators.hpp"

namespace mnar {

/// One term of the saturated sum-to-zero log-linear expansion of log mu over
/// the axes (Y1..Yn, R1..Rk). R axes have level 0 = observed, 1 = missing.
struct LoglinearEffect {
  std::vector<int> axes;  // sorted axis indices
  std::string name;       // e.g. "Y1:R1"; empty for the grand mean
  std::vector<double> values;  // row-major over the listed axes
};

struct LogLinearDecomposition {
  std::vector<std::string> axis_names;
  std::vector<int> axis_dims;
  std::vector<LoglinearEffect> effects;  // every subset of axes

  [[nodiscard]] const LoglinearEffect& effect(const std::vector<int>& axes) const;
  [[nodiscard]] const LoglinearEffect& effect(const std::string& name) const;
  /// Value of an effect at a full index over all axes.
  [[nodiscard]] double term(const LoglinearEffect& e, const std::vector<int>& index) const;
  /// Sum of every effect at a full index (equals log mu).
  [[nodiscard]] double reconstruct(const std::vector<int>& index) const;
};

/// Throws DomainError when some expected count is not positive.
LogLinearDecomposition decompose_loglinear(const FitResult& fit,
                                           const std::vector<std::string>& variable_names);

}  // namespace mnar
