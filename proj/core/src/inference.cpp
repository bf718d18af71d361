#include "mnar/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "mnar/errors.hpp"

namespace mnar {

GoodnessOfFit g_squared(const IncompleteTable& table, const FitResult& fit) {
  GoodnessOfFit out;
  const double l1 = perfect_fit_loglik(table);
  out.g2 = std::isfinite(fit.loglik) ? 2.0 * (l1 - fit.loglik)
                                     : std::numeric_limits<double>::infinity();
  if (out.g2 < 0.0 && out.g2 > -1e-9 * (1.0 + std::abs(l1))) out.g2 = 0.0;
  out.df = degrees_of_freedom(fit.spec, table.levels());
  if (out.df > 0) out.p_value = chi2_survival(std::max(out.g2, 0.0), out.df);
  return out;
}

double chi2_survival(double x, long long df) {
  if (df <= 0) throw DomainError("chi-square degrees of freedom must be positive");
  if (std::isnan(x)) throw DomainError("chi-square statistic is NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

std::vector<double> joint_probabilities(const FitResult& fit) {
  if (fit.expected.empty()) return {};
  std::vector<double> pi(fit.expected.front().size(), 0.0);
  for (const auto& r : fit.expected)
    for (std::size_t c = 0; c < r.size(); ++c) pi[c] += r[c];
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("fitted table has zero total");
  for (double& v : pi) v /= total;
  return pi;
}

double conditional_missing_prob(const FitResult& fit, int position, const LevelAssignment& cell) {
  if (position < 0 || position >= fit.spec.size())
    throw ValidationError("not a missing-capable position");
  const auto& odds = fit.params.odds[position];
  std::size_t level = 0;
  if (odds.dependency >= 0) {
    const auto dep = static_cast<std::size_t>(odds.dependency);
    if (dep >= cell.size() || !cell[dep])
      throw ValidationError("level of the odds dependency is not given");
    level = static_cast<std::size_t>(*cell[dep]);
    if (level >= odds.values.size()) throw ValidationError("dependency level out of range");
  }
  const double a = odds.values[level];
  return a / (1.0 + a);
}

std::string_view variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::FormulaObservedMargin: return "formula-models-2-3-4";
    case VarianceMethod::FormulaSecondMargin: return "formula-models-5-9-13";
    case VarianceMethod::FormulaFullyObserved: return "formula-models-6-11-16";
    case VarianceMethod::Delta: return "delta";
  }
  return "?";
}

namespace {

std::size_t cell_offset(const Shape& shape, int a, int b, const std::vector<int>& rest) {
  std::vector<int> idx;
  idx.push_back(a);
  idx.push_back(b);
  idx.insert(idx.end(), rest.begin(), rest.end());
  return shape.offset(idx);
}

void check_indices(const std::vector<int>& levels, const OddsRatioIndices& idx) {
  if (levels.size() < 2) throw ValidationError("odds ratio needs at least two variables");
  if (idx.rest.size() != levels.size() - 2)
    throw ValidationError("odds ratio needs a level for every variable after the first two");
  auto in = [](int v, int n) { return v >= 0 && v < n; };
  if (!in(idx.i, levels[0]) || !in(idx.i2, levels[0]) || !in(idx.j, levels[1]) ||
      !in(idx.j2, levels[1]) || idx.i >= idx.i2 || idx.j >= idx.j2)
    throw ValidationError("odds ratio levels must satisfy i < i2 and j < j2");
  for (std::size_t r = 0; r < idx.rest.size(); ++r)
    if (!in(idx.rest[r], levels[r + 2])) throw ValidationError("odds ratio level out of range");
}

double cross_ratio(const std::vector<double>& v, const Shape& shape, const OddsRatioIndices& idx) {
  const double a = v[cell_offset(shape, idx.i, idx.j, idx.rest)];
  const double d = v[cell_offset(shape, idx.i2, idx.j2, idx.rest)];
  const double b = v[cell_offset(shape, idx.i, idx.j2, idx.rest)];
  const double c = v[cell_offset(shape, idx.i2, idx.j, idx.rest)];
  if (!(b > 0.0) || !(c > 0.0)) throw DomainError("odds ratio has a zero denominator cell");
  return a * d / (b * c);
}

bool standard_layout(const FitResult& fit) {
  return fit.levels.size() == 3 && fit.spec.variables == std::vector<int>{0, 1};
}

}  // namespace

double observed_odds_ratio(const IncompleteTable& table, const OddsRatioIndices& idx) {
  check_indices(table.levels(), idx);
  return cross_ratio(table.fully_observed().counts, table.cell_shape(), idx);
}

bool odds_ratio_invariant(const FitResult& fit, int n) {
  if (n != 3 || !standard_layout(fit)) return false;
  const auto num = model_number(fit.spec, n);
  if (num == 2 || num == 4 || num == 9 || num == 13 || num == 16) return true;
  if (num == 3 || num == 5 || num == 6 || num == 11) return !fit.is_boundary();
  return false;
}

double odds_ratio_variance_delta(const IncompleteTable& table, const FitResult& fit,
                                 const OddsRatioIndices& idx, const FitOptions& options) {
  check_indices(table.levels(), idx);
  const LikelihoodSpec ls(table, fit.spec);
  const auto margins = expected_margins(ls, fit.params);
  FitOptions refit = options;
  refit.tol = std::min(options.tol, 1e-14);
  refit.max_iter = std::max(options.max_iter, 100000);
  const Shape& shape = table.cell_shape();
  auto or_of = [&](const IncompleteTable& t) {
    const auto f = mnar::fit(t, fit.spec, refit);
    return cross_ratio(joint_probabilities(f), shape, idx);
  };

  double var = 0.0;
  for (std::size_t r = 0; r < table.num_patterns(); ++r) {
    const auto& counts = table.block(r).counts;
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double y = counts[b];
      const double h = 1e-5 * std::max(1.0, y);
      auto perturbed = [&](double delta) {
        auto blocks = table.blocks();
        blocks[r].counts[b] = y + delta;
        return IncompleteTable(table.variables(), std::move(blocks));
      };
      double deriv = 0.0;
      if (y < h) {
        deriv = (or_of(perturbed(h)) - or_of(table)) / h;
      } else {
        deriv = (or_of(perturbed(h)) - or_of(perturbed(-h))) / (2.0 * h);
      }
      var += deriv * deriv * margins[r][b];
    }
  }
  return var;
}

double odds_ratio_variance(const IncompleteTable& table, const FitResult& fit,
                           const OddsRatioIndices& idx, const FitOptions& options,
                           VarianceMethod* used) {
  check_indices(table.levels(), idx);
  auto set = [&](VarianceMethod m) {
    if (used) *used = m;
  };
  const std::size_t num = standard_layout(fit) ? model_number(fit.spec, 3) : 0;
  const bool interior = !fit.is_boundary();
  const int group = !interior                                 ? 0
                    : (num == 2 || num == 3 || num == 4)      ? 1
                    : (num == 5 || num == 9 || num == 13)     ? 2
                    : (num == 6 || num == 11 || num == 16)    ? 3
                                                              : 0;
  if (group == 0) {
    set(VarianceMethod::Delta);
    return odds_ratio_variance_delta(table, fit, idx, options);
  }

  const auto& y = table.fully_observed().counts;
  const Shape& shape = table.cell_shape();
  const double y_ij = y[cell_offset(shape, idx.i, idx.j, idx.rest)];
  const double y_ij2 = y[cell_offset(shape, idx.i, idx.j2, idx.rest)];
  const double y_i2j = y[cell_offset(shape, idx.i2, idx.j, idx.rest)];
  const double y_i2j2 = y[cell_offset(shape, idx.i2, idx.j2, idx.rest)];
  if (!(y_ij > 0.0 && y_ij2 > 0.0 && y_i2j > 0.0 && y_i2j2 > 0.0))
    throw DomainError("odds ratio variance needs positive fully observed cells");
  const double orv = cross_ratio(joint_probabilities(fit), shape, idx);
  const double or2 = orv * orv;
  const int k3 = idx.rest.at(0);

  if (group == 3) {
    set(VarianceMethod::FormulaFullyObserved);
    return or2 * (1.0 / y_ij + 1.0 / y_ij2 + 1.0 / y_i2j + 1.0 / y_i2j2);
  }
  // y over (Y1, Y2) at the fixed Y3 level
  const auto at = [&](int a, int b) { return y[shape.offset(std::vector<int>{a, b, k3})]; };
  double y_kk = 0.0;
  for (int a = 0; a < table.levels()[0]; ++a)
    for (int b = 0; b < table.levels()[1]; ++b) y_kk += at(a, b);

  if (group == 1) {
    // supplementary block with Y1 missing, axes (Y2, Y3)
    const auto& ys = table.block(2).counts;
    const Shape s2({table.levels()[1], table.levels()[2]});
    auto col = [&](int b) {
      double s = 0.0;
      for (int a = 0; a < table.levels()[0]; ++a) s += at(a, b);
      return s;
    };
    auto sup = [&](int b) { return ys[s2.offset(std::vector<int>{b, k3})]; };
    double sup_k = 0.0;
    for (int b = 0; b < table.levels()[1]; ++b) sup_k += sup(b);
    set(VarianceMethod::FormulaObservedMargin);
    return or2 * (y_kk / (y_kk + sup_k)) *
           ((col(idx.j) + sup(idx.j)) / col(idx.j) * (1.0 / y_ij + 1.0 / y_i2j) +
            (col(idx.j2) + sup(idx.j2)) / col(idx.j2) * (1.0 / y_ij2 + 1.0 / y_i2j2));
  }
  // supplementary block with Y2 missing, axes (Y1, Y3)
  const auto& ys = table.block(1).counts;
  const Shape s1({table.levels()[0], table.levels()[2]});
  auto row = [&](int a) {
    double s = 0.0;
    for (int b = 0; b < table.levels()[1]; ++b) s += at(a, b);
    return s;
  };
  auto sup = [&](int a) { return ys[s1.offset(std::vector<int>{a, k3})]; };
  double sup_k = 0.0;
  for (int a = 0; a < table.levels()[0]; ++a) sup_k += sup(a);
  set(VarianceMethod::FormulaSecondMargin);
  return or2 * (y_kk / (y_kk + sup_k)) *
         ((row(idx.i) + sup(idx.i)) / row(idx.i) * (1.0 / y_ij + 1.0 / y_ij2) +
          (row(idx.i2) + sup(idx.i2)) / row(idx.i2) * (1.0 / y_i2j + 1.0 / y_i2j2));
}

OddsRatioEstimate marginal_odds_ratio(const IncompleteTable& table, const FitResult& fit,
                                      const OddsRatioIndices& idx, const FitOptions& options) {
  check_indices(table.levels(), idx);
  OddsRatioEstimate out;
  out.indices = idx;
  out.value = cross_ratio(joint_probabilities(fit), table.cell_shape(), idx);
  out.invariant_equal_to_observed = odds_ratio_invariant(fit, table.num_variables());
  out.variance = odds_ratio_variance(table, fit, idx, options, &out.variance_method);
  if (fit.is_boundary())
    out.warnings.push_back("boundary fit: the delta-method variance is conditional on the pinned odds");
  return out;
}

}  // namespace mnar
