#include "mnar/linear_solve.hpp"

#include <string>

#include "mnar/errors.hpp"

namespace mnar {

namespace {
constexpr double kConditionLimit = 1e8;
constexpr double kRankTolerance = 1e-12;
}  // namespace

std::string_view regime_name(SolveRegime r) {
  switch (r) {
    case SolveRegime::Exact: return "exact";
    case SolveRegime::LeastSquares: return "least-squares";
    case SolveRegime::MinimumNorm: return "minimum-norm";
  }
  return "?";
}

OddsSolution solve_odds_system(const OddsSystem& sys) {
  const auto& A = sys.matrix;
  const auto rows = A.rows();
  const auto cols = A.cols();
  if (rows == 0 || cols == 0) throw SingularSystemError("odds system is empty");
  if (sys.rhs.size() != rows) throw ValidationError("odds system rhs length differs from row count");
  if (!A.allFinite() || !sys.rhs.allFinite()) throw DomainError("odds system has non-finite entries");

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  const Eigen::Index full = std::min(rows, cols);
  const double smax = s(0);
  const double smin = s(full - 1);
  if (!(smax > 0.0) || smin <= smax * kRankTolerance * static_cast<double>(std::max(rows, cols))) {
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < full; ++i)
      if (s(i) > smax * kRankTolerance * static_cast<double>(std::max(rows, cols))) ++rank;
    const std::string dim = rows >= cols ? "columns (" + std::to_string(cols) + " odds levels)"
                                         : "rows (" + std::to_string(rows) + " margin cells)";
    throw SingularSystemError("odds system is rank deficient: rank " + std::to_string(rank) +
                              " < " + std::to_string(full) + " " + dim);
  }

  OddsSolution out;
  out.condition = smax / smin;
  out.regime = rows == cols  ? SolveRegime::Exact
               : rows > cols ? SolveRegime::LeastSquares
                             : SolveRegime::MinimumNorm;
  if (out.condition > kConditionLimit) {
    out.x = A.completeOrthogonalDecomposition().solve(sys.rhs);
    return out;
  }
  switch (out.regime) {
    case SolveRegime::Exact:
      out.x = A.partialPivLu().solve(sys.rhs);
      break;
    case SolveRegime::LeastSquares:
      out.x = (A.transpose() * A).ldlt().solve(A.transpose() * sys.rhs);
      break;
    case SolveRegime::MinimumNorm:
      out.x = A.transpose() * (A * A.transpose()).ldlt().solve(sys.rhs);
      break;
  }
  return out;
}

}  // namespace mnar
