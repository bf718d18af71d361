#pragma once

#include <string>

#include "mnar/compare.hpp"
#include "mnar/estimators.hpp"
#include "mnar/inference.hpp"
#include "mnar/table.hpp"

namespace mnar {

/// FitResult plus goodness of fit; JSON keeps full precision.
std::string fit_report_json(const IncompleteTable& table, const FitResult& fit,
                            const GoodnessOfFit& gof, int indent = 2);
/// Aligned text with 2-decimal expected counts.
std::string fit_report_text(const IncompleteTable& table, const FitResult& fit,
                            const GoodnessOfFit& gof);

std::string comparison_json(const ComparisonReport& report, int indent = 2);
std::string comparison_text(const ComparisonReport& report);

/// Table document (same schema as the input) holding expected margins per
/// block, plus a "cells" entry with the expected count of every full cell
/// under every pattern.
std::string expected_table_json(const IncompleteTable& table, const FitResult& fit,
                                int indent = 2);
std::string expected_table_text(const IncompleteTable& table, const FitResult& fit);

}  // namespace mnar
