#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace mnar {

/// Rows are supplementary-margin cells, columns the levels of the NMAR
/// variable; entries are baseline fitted counts.
struct OddsSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

enum class SolveRegime { Exact, LeastSquares, MinimumNorm };

std::string_view regime_name(SolveRegime r);

struct OddsSolution {
  Eigen::VectorXd x;
  SolveRegime regime = SolveRegime::Exact;
  double condition = 1.0;
};

/// Square: exact. Tall: ordinary least squares. Wide: minimum-norm exact
/// solution. Negative components are returned unchanged. Throws
/// SingularSystemError when the matrix is not of full rank.
OddsSolution solve_odds_system(const OddsSystem& sys);

}  // namespace mnar
