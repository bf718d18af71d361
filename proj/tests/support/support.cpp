#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <sstream>

#ifndef MNAR_TEST_DATA_DIR
#error "MNAR_TEST_DATA_DIR must be defined"
#endif

namespace mnar::testing {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(MNAR_TEST_DATA_DIR) / name;
}

const IncompleteTable& table4() {
  static const IncompleteTable t = load_table(data_path("table4.json"));
  return t;
}
const IncompleteTable& table5() {
  static const IncompleteTable t = load_table(data_path("table5.json"));
  return t;
}
const IncompleteTable& table8() {
  static const IncompleteTable t = load_table(data_path("table8.json"));
  return t;
}

namespace {

std::vector<VariableMeta> variables_for(const std::vector<int>& levels, int k) {
  std::vector<VariableMeta> vars;
  for (std::size_t v = 0; v < levels.size(); ++v)
    vars.push_back({"Y" + std::to_string(v + 1), levels[v], static_cast<int>(v) < k});
  return vars;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

IncompleteTable make_table(const std::vector<int>& levels, int k,
                           std::vector<std::vector<double>> blocks) {
  return IncompleteTable::from_counts(variables_for(levels, k), std::move(blocks));
}

IncompleteTable random_table(std::mt19937_64& rng, const std::vector<int>& levels, int k, int lo,
                             int hi) {
  const auto vars = variables_for(levels, k);
  std::uniform_int_distribution<int> dist(lo, hi);
  std::vector<std::vector<double>> blocks;
  for (std::size_t r = 0; r < (std::size_t{1} << k); ++r) {
    std::size_t size = 1;
    for (std::size_t v = 0; v < levels.size(); ++v) {
      const bool missing = static_cast<int>(v) < k && pattern_has(r, static_cast<int>(v), k);
      if (!missing) size *= static_cast<std::size_t>(levels[v]);
    }
    std::vector<double> b(size);
    for (double& x : b) x = dist(rng);
    blocks.push_back(std::move(b));
  }
  return IncompleteTable::from_counts(vars, std::move(blocks));
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> normal_equations(const std::vector<std::vector<double>>& A,
                                     const std::vector<double>& b) {
  const std::size_t n = A.front().size();
  std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) M[i][j] += A[r][i] * A[r][j];
      M[i][n] += A[r][i] * b[r];
    }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    std::swap(M[c], M[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = M[r][c] / M[c][c];
      for (std::size_t j = c; j <= n; ++j) M[r][j] -= f * M[c][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
  return x;
}

std::vector<double> grid_least_squares(const std::vector<std::vector<double>>& A,
                                       const std::vector<double>& b) {
  auto sse = [&](double x0, double x1) {
    double s = 0.0;
    for (std::size_t r = 0; r < A.size(); ++r) {
      const double e = A[r][0] * x0 + A[r][1] * x1 - b[r];
      s += e * e;
    }
    return s;
  };
  double c0 = 0.0, c1 = 0.0, step = 100.0;
  while (step > 1e-6) {
    double best = sse(c0, c1);
    double b0 = c0, b1 = c1;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double v = sse(c0 + i * step, c1 + j * step);
        if (v < best) {
          best = v;
          b0 = c0 + i * step;
          b1 = c1 + j * step;
        }
      }
    if (b0 == c0 && b1 == c1) step /= 4.0;
    c0 = b0;
    c1 = b1;
  }
  // finish with exact line minimization along each coordinate
  std::vector<double> x{c0, c1};
  for (int it = 0; it < 1000000; ++it) {
    double moved = 0.0;
    for (int c = 0; c < 2; ++c) {
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < A.size(); ++r) {
        const double rest = b[r] - A[r][1 - c] * x[1 - c];
        num += A[r][c] * rest;
        den += A[r][c] * A[r][c];
      }
      const double nx = num / den;
      moved = std::max(moved, std::abs(nx - x[c]));
      x[c] = nx;
    }
    if (moved < 1e-15) break;
  }
  return x;
}

std::vector<double> nullspace_min_norm(const std::vector<std::vector<double>>& A,
                                       const std::vector<double>& b) {
  const std::size_t rows = A.size();
  const std::size_t cols = A.front().size();
  if (cols != rows + 1) throw std::invalid_argument("oracle needs a one-dimensional null space");
  // Particular solution: last unknown = 0, solve the square part by elimination.
  std::vector<std::vector<double>> M(rows, std::vector<double>(rows + 1));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < rows; ++c) M[r][c] = A[r][c];
    M[r][rows] = b[r];
  }
  auto solve_square = [&](std::vector<std::vector<double>> S) {
    const std::size_t n = S.size();
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r)
        if (std::abs(S[r][c]) > std::abs(S[piv][c])) piv = r;
      std::swap(S[c], S[piv]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = S[r][c] / S[c][c];
        for (std::size_t j = c; j <= n; ++j) S[r][j] -= f * S[c][j];
      }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = S[i][n] / S[i][i];
    return x;
  };
  auto xp = solve_square(M);
  xp.push_back(0.0);
  // Null vector: fix last = 1, solve A[:, :rows] z = -A[:, rows].
  for (std::size_t r = 0; r < rows; ++r) M[r][rows] = -A[r][rows];
  auto z = solve_square(M);
  z.push_back(1.0);
  // the minimum-norm point is xp minus its projection on z
  double xz = 0.0, zz = 0.0;
  for (std::size_t i = 0; i < cols; ++i) {
    xz += xp[i] * z[i];
    zz += z[i] * z[i];
  }
  const double t = -xz / zz;
  std::vector<double> x(cols);
  for (std::size_t i = 0; i < cols; ++i) x[i] = xp[i] + t * z[i];
  return x;
}

double hand_g2_one_missing(const IncompleteTable& table, const std::vector<double>& m,
                           const std::vector<double>& a) {
  // Cells indexed (i, j, k) row-major; the supplementary margin sums over i.
  const int I = table.levels()[0], J = table.levels()[1], K = table.levels()[2];
  const auto& y1 = table.block(0).counts;
  const auto& y2 = table.block(1).counts;
  double s = 0.0, mass = 0.0;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) {
        const std::size_t c = (static_cast<std::size_t>(i) * J + j) * K + k;
        if (y1[c] > 0) s += y1[c] * std::log(m[c] / y1[c]);
        mass += m[c] * (1.0 + a[c]);
      }
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k) {
      double mu = 0.0;
      for (int i = 0; i < I; ++i) {
        const std::size_t c = (static_cast<std::size_t>(i) * J + j) * K + k;
        mu += m[c] * a[c];
      }
      const double y = y2[static_cast<std::size_t>(j) * K + k];
      if (y > 0) s += y * std::log(mu / y);
    }
  return -2.0 * (s - mass + table.total());
}

double chi2_tail_oracle(double x, int df) {
  const double h = x / 2.0;
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int i = 1; i < df / 2; ++i) {
      term *= h / i;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  // odd: Q = erfc(sqrt(h)) + e^{-h} sum_{i=1}^{(df-1)/2} h^{i-1/2} / Gamma(i+1/2)
  double sum = std::erfc(std::sqrt(h));
  double term = std::sqrt(h) / std::tgamma(1.5);
  for (int i = 1; i <= (df - 1) / 2; ++i) {
    sum += std::exp(-h) * term;
    term *= h / (i + 0.5);
  }
  return sum;
}

// ---------------------------------------------------------------------------

std::vector<Check> property_em_monotone(int tables, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int monotone_fail = 0, mass_fail = 0, runs = 0;
  double worst_drop = 0.0, worst_mass = 0.0;
  for (int t = 0; t < tables; ++t) {
    std::uniform_int_distribution<int> lv(2, 3), kk(1, 3);
    const std::vector<int> levels{lv(rng), lv(rng), 2};
    const int k = kk(rng);
    const auto table = random_table(rng, levels, k);
    const auto specs = enumerate_models(3, table.missing_variables());
    std::uniform_int_distribution<std::size_t> pick(0, specs.size() - 1);
    const LikelihoodSpec ls(table, specs[pick(rng)]);
    EmOptions eo;
    eo.tol = 1e-12;
    eo.max_iter = 300;
    eo.record_trace = true;
    const auto em = em_fit(ls, std::nullopt, eo);
    ++runs;
    bool mono = true, mass = true;
    for (std::size_t s = 1; s < em.trace.size(); ++s) {
      const double drop = em.trace[s - 1].loglik - em.trace[s].loglik;
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-9 * (1.0 + std::abs(em.trace[s - 1].loglik))) mono = false;
      const double md = rel_diff(em.trace[s].completed_total, table.total());
      worst_mass = std::max(worst_mass, md);
      if (md > 1e-12) mass = false;
    }
    monotone_fail += mono ? 0 : 1;
    mass_fail += mass ? 0 : 1;
  }
  return {
      {"EM log-likelihood never decreases", monotone_fail == 0,
       std::to_string(runs) + " fits, largest drop " + fmt(worst_drop)},
      {"E-step completed total equals N", mass_fail == 0,
       std::to_string(runs) + " fits, largest relative gap " + fmt(worst_mass)},
  };
}

std::vector<Check> property_perfect_fit() {
  std::vector<const IncompleteTable*> tables{&table5(), &table8(), &table4()};
  std::mt19937_64 rng(11);
  std::vector<IncompleteTable> extra;
  for (int i = 0; i < 6; ++i) extra.push_back(random_table(rng, {2 + i % 2, 2, 3 - i % 2}, 1 + i % 3));
  for (const auto& t : extra) tables.push_back(&t);

  FitOptions opts;
  opts.polish_guard = false;
  int qualifying = 0, failures = 0, mcar_specs = 0, mcar_equal = 0;
  std::string first_failure;
  for (const auto* t : tables) {
    const int k = t->num_missing();
    for (const auto& spec : enumerate_models(t->num_variables(), t->missing_variables())) {
      const auto cat = spec.category();
      const bool qualifies = cat == ModelCategory::NMAR || cat == ModelCategory::NMAR_MAR ||
                             (cat == ModelCategory::MAR && k >= 2);
      if (!qualifies && !spec.any_mcar()) continue;
      const auto f = fit(*t, spec, opts);
      if (qualifies) {
        if (f.is_boundary() || f.method != FitMethod::ClosedForm) continue;
        ++qualifying;
        if (f.baseline() != t->fully_observed().counts) {
          ++failures;
          if (first_failure.empty()) first_failure = cli_label(spec, *t);
        }
      } else if (spec.any_mcar() && f.method != FitMethod::EM) {
        ++mcar_specs;
        if (f.baseline() == t->fully_observed().counts) ++mcar_equal;
      }
    }
  }
  return {
      {"interior NMAR / NMAR+MAR / multi-MAR fits reproduce y exactly", failures == 0 && qualifying > 0,
       std::to_string(qualifying) + " fits checked" +
           (first_failure.empty() ? "" : ", first failure " + first_failure)},
      {"fits with an MCAR mechanism move m away from y", mcar_specs > 0 && mcar_equal == 0,
       std::to_string(mcar_specs) + " fits, " + std::to_string(mcar_equal) + " equal to y"},
  };
}

std::vector<Check> property_remark_or(int random_tables, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IncompleteTable> tables{table8()};
  for (int i = 0; i < random_tables; ++i) {
    std::uniform_int_distribution<int> lv(2, 3);
    tables.push_back(random_table(rng, {lv(rng), lv(rng), lv(rng)}, 2));
  }
  int checked = 0, failed = 0;
  double worst = 0.0;
  for (const auto& t : tables) {
    for (const auto& spec : enumerate_models(3, t.missing_variables())) {
      const auto f = fit(t, spec);
      if (!odds_ratio_invariant(f, 3)) continue;
      const auto pi = joint_probabilities(f);
      const auto& lv = t.levels();
      for (int i = 0; i < lv[0]; ++i)
        for (int i2 = i + 1; i2 < lv[0]; ++i2)
          for (int j = 0; j < lv[1]; ++j)
            for (int j2 = j + 1; j2 < lv[1]; ++j2)
              for (int k = 0; k < lv[2]; ++k) {
                OddsRatioIndices idx{i, i2, j, j2, {k}};
                const Shape& s = t.cell_shape();
                auto at = [&](int a, int b) { return pi[s.offset(std::vector<int>{a, b, k})]; };
                const double fitted = at(i, j) * at(i2, j2) / (at(i, j2) * at(i2, j));
                const double d = rel_diff(fitted, observed_odds_ratio(t, idx));
                worst = std::max(worst, d);
                ++checked;
                if (d > 1e-10) ++failed;
              }
    }
  }
  return {{"marginal OR equals the fully observed cross ratio (models 2,4,9,13,16; interior 3,5,6,11)",
           failed == 0 && checked > 0,
           std::to_string(checked) + " odds ratios, worst relative gap " + fmt(worst)}};
}

std::vector<Check> property_solver_oracles(int systems, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  double worst_ls = 0.0, worst_grid = 0.0, worst_mn = 0.0, worst_sq = 0.0;
  for (int s = 0; s < systems; ++s) {
    // tall, two unknowns
    const int rows = 3 + s % 4;
    std::vector<std::vector<double>> A(rows, std::vector<double>(2));
    std::vector<double> b(rows);
    Eigen::MatrixXd Am(rows, 2);
    Eigen::VectorXd bm(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < 2; ++c) Am(r, c) = A[r][c] = u(rng);
      bm(r) = b[r] = u(rng);
    }
    const auto sol = solve_odds_system({Am, bm});
    const auto ne = normal_equations(A, b);
    const auto grid = grid_least_squares(A, b);
    for (int c = 0; c < 2; ++c) {
      worst_ls = std::max(worst_ls, std::abs(sol.x(c) - ne[c]));
      worst_grid = std::max(worst_grid, std::abs(sol.x(c) - grid[c]));
    }
    // wide, one-dimensional null space
    const int wr = 1 + s % 2;
    std::vector<std::vector<double>> W(wr, std::vector<double>(wr + 1));
    std::vector<double> wb(wr);
    Eigen::MatrixXd Wm(wr, wr + 1);
    Eigen::VectorXd wbm(wr);
    for (int r = 0; r < wr; ++r) {
      for (int c = 0; c <= wr; ++c) Wm(r, c) = W[r][c] = u(rng);
      wbm(r) = wb[r] = u(rng);
    }
    const auto wsol = solve_odds_system({Wm, wbm});
    const auto mn = nullspace_min_norm(W, wb);
    for (int c = 0; c <= wr; ++c) worst_mn = std::max(worst_mn, std::abs(wsol.x(c) - mn[c]));
    // square
    Eigen::MatrixXd S = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return u(rng); });
    Eigen::VectorXd sb = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    const auto ssol = solve_odds_system({S, sb});
    worst_sq = std::max(worst_sq, (S * ssol.x - sb).norm() / sb.norm());
  }
  return {
      {"least squares matches normal-equation oracle", worst_ls < 1e-8, "max abs diff " + fmt(worst_ls)},
      {"least squares matches grid-refinement oracle", worst_grid < 1e-8, "max abs diff " + fmt(worst_grid)},
      {"minimum norm matches null-space search oracle", worst_mn < 1e-8, "max abs diff " + fmt(worst_mn)},
      {"square systems solved exactly", worst_sq < 1e-12, "max relative residual " + fmt(worst_sq)},
  };
}

namespace {

/// 2x2x2 table, Y1 missing, whose NMAR system has the exact solution (-0.04, 0.3).
IncompleteTable negative_alpha_k1() {
  const std::vector<double> y{50, 50, 50, 50, 10, 20, 30, 40};
  std::vector<double> y2(4);
  for (int jk = 0; jk < 4; ++jk) y2[jk] = -0.04 * y[jk] + 0.3 * y[4 + jk];
  return make_table({2, 2, 2}, 1, {y, y2});
}

/// 2x2x2 table with Y1, Y2 missing. The Y1 system is exact at (-0.04, 0.3);
/// the Y2-missing block and the double-missing block are positive and mild.
IncompleteTable negative_alpha_k2() {
  const std::vector<double> y{50, 50, 50, 50, 10, 20, 30, 40};
  std::vector<double> y21(4);  // over (Y2, Y3)
  for (int jk = 0; jk < 4; ++jk) y21[jk] = -0.04 * y[jk] + 0.3 * y[4 + jk];
  const std::vector<double> y12{12, 9, 6, 11};  // over (Y1, Y3)
  const std::vector<double> y22{5, 7};          // over Y3
  return make_table({2, 2, 2}, 2, {y, y12, y21, y22});
}

/// Same with the roles of Y1 and Y2 swapped so that the Y2 system goes negative.
IncompleteTable negative_beta_k2() {
  // y[i][j][k]; Y2 = 0 column is 50 everywhere, Y2 = 1 column varies.
  std::vector<double> y(8);
  const double col1[2][2] = {{10, 20}, {30, 40}};
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      y[(i * 2 + 0) * 2 + k] = 50;
      y[(i * 2 + 1) * 2 + k] = col1[i][k];
    }
  std::vector<double> y12(4);  // over (Y1, Y3)
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      y12[i * 2 + k] = -0.04 * y[(i * 2 + 0) * 2 + k] + 0.3 * y[(i * 2 + 1) * 2 + k];
  const std::vector<double> y21{8, 13, 7, 10};  // over (Y2, Y3)
  const std::vector<double> y22{6, 4};
  return make_table({2, 2, 2}, 2, {y, y12, y21, y22});
}

double level_total(const std::vector<double>& y, const Shape& s, int var, int level) {
  double t = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c)
    if (s.unravel(c)[var] == level) t += y[c];
  return t;
}

}  // namespace

std::vector<Check> property_boundary() {
  std::vector<Check> out;
  const double l_tol = 1e-9;

  // one missing variable
  {
    const auto t = negative_alpha_k1();
    const auto spec = parse_spec("Y1:self", t);
    const auto f = fit(t, spec);
    const auto& y = t.block(0).counts;
    const auto& y2 = t.block(1).counts;
    const double T2 = t.block(1).total();
    bool formula = f.is_boundary();
    double worst = 0.0;
    if (formula) {
      const int pin = f.boundary->zero_levels.at(0), fr = 1 - pin;
      const double yfree = level_total(y, t.cell_shape(), 0, fr);
      const auto& a = f.params.odds[0].values;
      formula = a[pin] == 0.0;
      worst = std::max(worst, std::abs(a[fr] - T2 / yfree));
      for (std::size_t c = 0; c < y.size(); ++c) {
        const int lvl = t.cell_shape().unravel(c)[0];
        const double want = lvl == pin ? y[c] : (y[c] + y2[c % 4]) * yfree / (yfree + T2);
        worst = std::max(worst, std::abs(f.baseline()[c] - want));
      }
    }
    out.push_back({"one missing: pinned level is exactly 0 and the free level follows the closed form",
                   formula && worst < 1e-10, "max abs diff " + fmt(worst)});
    bool best = f.is_boundary();
    if (best)
      for (const auto& c : f.boundary->candidates) best = best && f.loglik >= c.loglik - l_tol;
    out.push_back({"one missing: chosen candidate has the largest log-likelihood (smallest G2)", best,
                   f.is_boundary() ? std::to_string(f.boundary->candidates.size()) + " candidates" : "no boundary"});
    const LikelihoodSpec ls(t, spec);
    EmOptions eo;
    eo.tol = 1e-14;
    eo.max_iter = 2000;
    const auto em = em_fit(ls, f.params, eo);
    out.push_back({"one missing: EM from the boundary fit gains nothing (constrained maximum)",
                   em.loglik - f.loglik < 1e-7, "gain " + fmt(em.loglik - f.loglik)});
    out.push_back({"one missing: boundary fit conserves the total",
                   rel_diff(f.expected_total(), t.total()) < 1e-10, fmt(f.expected_total())});
  }

  // two missing, partner MAR on the NMAR variable: (a_i.., b_i..)
  {
    const auto t = negative_alpha_k2();
    const auto f = fit(t, parse_spec("Y1:self,Y2:Y1", t));
    bool ok = f.is_boundary() && f.boundary->variable == 0;
    double worst = 0.0;
    if (ok) {
      const int pin = f.boundary->zero_levels.at(0), fr = 1 - pin;
      const auto& y = t.block(0).counts;
      const double y_free11 = level_total(y, t.cell_shape(), 0, fr);
      const auto y12 = t.block_margin(1, {0});
      const double T21 = t.block(2).total(), T22 = t.block(3).total();
      const double theta = y_free11 * T22 / (y12[fr] * T21);
      worst = std::max({std::abs(f.params.assoc[3] - theta),
                        std::abs(f.params.odds[0].values[fr] - T21 / y_free11)});
      for (int i = 0; i < 2; ++i)
        worst = std::max(worst, std::abs(f.params.odds[1].values[i] -
                                         y12[i] / level_total(y, t.cell_shape(), 0, i)));
      ok = f.params.odds[0].values[pin] == 0.0;
    }
    out.push_back({"two missing (b): theta and alpha match the printed boundary forms", ok && worst < 1e-10,
                   "max abs diff " + fmt(worst)});
  }

  // two missing, partner MCAR: (a_i.., b...)
  {
    const auto t = negative_alpha_k2();
    const auto f = fit(t, parse_spec("Y1:self,Y2:const", t));
    bool ok = f.is_boundary();
    double worst = 0.0;
    if (ok) {
      const int pin = f.boundary->zero_levels.at(0), fr = 1 - pin;
      const auto& y = t.block(0).counts;
      const auto& yp = t.block(2).counts;  // Y1 missing, over (Y2, Y3)
      const auto yq = t.block_margin(1, {0});
      const double T11 = t.block(0).total(), T12 = t.block(1).total(), T21 = t.block(2).total(),
                   T22 = t.block(3).total();
      const double yf = level_total(y, t.cell_shape(), 0, fr), yz = level_total(y, t.cell_shape(), 0, pin);
      worst = std::abs(f.params.odds[0].values[fr] - T21 * (T11 + T12) / (T11 * (yf + yq[fr])));
      worst = std::max(worst, std::abs(f.params.odds[1].values[0] - T12 / T11));
      worst = std::max(worst, std::abs(f.params.assoc[3] - T11 * T22 / (T12 * T21)));
      for (std::size_t c = 0; c < y.size(); ++c) {
        const int lvl = t.cell_shape().unravel(c)[0];
        const double want = lvl == pin
                                ? y[c] * (yz + yq[pin]) * T11 / (yz * (T11 + T12))
                                : T11 * (yf + yq[fr]) * (y[c] + yp[c % 4]) / ((T11 + T12) * (yf + T21));
        worst = std::max(worst, std::abs(f.baseline()[c] - want));
      }
      ok = f.params.odds[0].values[pin] == 0.0;
    }
    out.push_back({"two missing (a): partner-MCAR boundary forms", ok && worst < 1e-9, "max abs diff " + fmt(worst)});
    out.push_back({"two missing (a): boundary fit conserves the total",
                   rel_diff(f.expected_total(), t.total()) < 1e-10, fmt(f.expected_total())});
  }

  // two missing, beta pinned, partner MAR on Y2: (a.j., b.j.)
  {
    const auto t = negative_beta_k2();
    const auto f = fit(t, parse_spec("Y1:Y2,Y2:self", t));
    bool ok = f.is_boundary() && f.boundary->variable == 1;
    double worst = 0.0;
    if (ok) {
      const int pin = f.boundary->zero_levels.at(0), fr = 1 - pin;
      const auto& y = t.block(0).counts;
      const auto& y12 = t.block(1).counts;  // over (Y1, Y3)
      const double T12 = t.block(1).total(), T21 = t.block(2).total(), T22 = t.block(3).total();
      const double yf = level_total(y, t.cell_shape(), 1, fr);
      const auto y21 = t.block_margin(2, {1});
      worst = std::abs(f.params.odds[1].values[fr] - T12 / yf);
      for (int j = 0; j < 2; ++j)
        worst = std::max(worst, std::abs(f.params.odds[0].values[j] -
                                         y21[j] / level_total(y, t.cell_shape(), 1, j)));
      worst = std::max(worst, std::abs(f.params.assoc[3] - yf * T22 / (y21[fr] * T12)));
      for (std::size_t c = 0; c < y.size(); ++c) {
        const auto idx = t.cell_shape().unravel(c);
        const double want = idx[1] == pin ? y[c]
                                          : yf * (y[c] + y12[idx[0] * 2 + idx[2]]) / (yf + T12);
        worst = std::max(worst, std::abs(f.baseline()[c] - want));
      }
      ok = f.params.odds[1].values[pin] == 0.0;
    }
    out.push_back({"two missing (e): beta boundary forms with MAR partner", ok && worst < 1e-10,
                   "max abs diff " + fmt(worst)});
  }

  // more than two levels: greedy pinning
  {
    // Y1 with 3 levels; supplementary margin built from odds (0.2, -0.05, 0.3)
    std::vector<double> y(12);
    for (std::size_t c = 0; c < 12; ++c) y[c] = 20 + 7 * ((c * 5) % 11);
    std::vector<double> y2(4, 0.0);
    const double a[3] = {0.2, -0.05, 0.3};
    for (std::size_t c = 0; c < 12; ++c) y2[c % 4] += a[c / 4] * y[c];
    const auto t = make_table({3, 2, 2}, 1, {y, y2});
    const auto f = fit(t, parse_spec("Y1:self", t));
    bool ok = f.is_boundary() && !f.boundary->zero_levels.empty();
    if (ok) {
      for (int l : f.boundary->zero_levels) ok = ok && f.params.odds[0].values[l] == 0.0;
      for (double v : f.params.odds[0].values) ok = ok && v >= 0.0;
    }
    out.push_back({"three levels: greedy pinning leaves no negative odds and pins exact zeros", ok,
                   f.is_boundary() ? "pinned " + std::to_string(f.boundary->zero_levels.size()) : "no boundary"});
  }

  {
    const auto f = fit(table5(), parse_spec("Y1:self", table5()));
    out.push_back({"Table 5 NMAR fit is interior", !f.is_boundary(), ""});
  }
  return out;
}

std::vector<Check> property_loglinear() {
  std::vector<Check> out;
  const std::vector<std::string> names{"Y1", "Y2", "Y3"};
  double worst_rec = 0.0, worst_sum = 0.0;
  int fits = 0;
  for (const auto* t : {&table5(), &table8(), &table4()}) {
    for (const auto& spec : enumerate_models(3, t->missing_variables())) {
      const auto f = fit(*t, spec);
      if (f.is_boundary()) continue;
      const auto d = decompose_loglinear(f, names);
      ++fits;
      const std::size_t npat = f.expected.size();
      const Shape full(d.axis_dims);
      for (std::size_t off = 0; off < full.size(); ++off) {
        const auto idx = full.unravel(off);
        const std::size_t cell = off / npat, r = off % npat;
        worst_rec = std::max(worst_rec, std::abs(d.reconstruct(idx) - std::log(f.expected[r][cell])));
      }
      for (const auto& e : d.effects) {
        if (e.axes.empty()) continue;
        const auto dims = select_dims(d.axis_dims, e.axes);
        for (std::size_t a = 0; a < e.axes.size(); ++a) {
          std::vector<int> keep;
          for (std::size_t b = 0; b < e.axes.size(); ++b)
            if (b != a) keep.push_back(static_cast<int>(b));
          for (double s : marginalize(e.values, dims, keep)) worst_sum = std::max(worst_sum, std::abs(s));
        }
      }
    }
  }
  out.push_back({"log-linear reconstruction is exact", worst_rec < 1e-10,
                 std::to_string(fits) + " fits, max error " + fmt(worst_rec)});
  out.push_back({"every lambda term sums to zero along each axis", worst_sum < 1e-10, "max " + fmt(worst_sum)});

  // odds identity on Table 5 MAR(Y3): alpha_k = exp(-2 (lambda_R(obs) + lambda_Y3R(k, obs)))
  {
    const auto f = fit(table5(), parse_spec("Y1:Y3", table5()));
    const auto d = decompose_loglinear(f, names);
    const auto& lr = d.effect("R1");
    const auto& l3r = d.effect("Y3:R1");
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double a = std::exp(-2.0 * (lr.values[0] + l3r.values[k * 2 + 0]));
      worst = std::max(worst, std::abs(a - f.params.odds[0].values[k]));
    }
    out.push_back({"odds identity from lambda terms (Table 5, Y1:Y3)", worst < 1e-8, "max abs diff " + fmt(worst)});
  }
  // theta identity on every interior Table 8 fit
  {
    double worst = 0.0;
    for (const auto& spec : enumerate_models(3, table8().missing_variables())) {
      const auto f = fit(table8(), spec);
      if (f.is_boundary()) continue;
      const auto d = decompose_loglinear(f, names);
      worst = std::max(worst, rel_diff(std::exp(4.0 * d.effect("R1:R2").values[0]), f.params.assoc[3]));
    }
    out.push_back({"theta = exp(4 lambda_R1R2(1,1)) on Table 8 fits", worst < 1e-8, "max rel diff " + fmt(worst)});
  }
  return out;
}

std::vector<Check> property_simulation(std::uint64_t seed) {
  struct Case {
    const char* category;
    const char* model;
  };
  const Case cases[] = {
      {"MCAR", "Y1:const,Y2:const,Y3:const"}, {"NMAR", "Y1:self,Y2:self,Y3:self"},
      {"MAR", "Y1:Y2,Y2:Y3,Y3:Y1"},           {"MCAR+NMAR", "Y1:self,Y2:const,Y3:self"},
      {"MCAR+MAR", "Y1:Y2,Y2:const,Y3:Y1"},   {"NMAR+MAR", "Y1:self,Y2:Y1,Y3:self"},
      {"NMAR+MAR+MCAR", "Y1:self,Y2:Y3,Y3:const"},
  };
  std::vector<Check> out;
  std::uint64_t s = seed;
  for (const auto& c : cases) {
    std::ostringstream doc;
    doc << R"({"variables":[{"name":"Y1","levels":2,"missing":true},{"name":"Y2","levels":2,"missing":true},)"
        << R"({"name":"Y3","levels":2,"missing":true}],"model":")" << c.model << R"(",)"
        << R"("baseline":[[[20,2],[3,9]],[[2,12],[10,3]]],)";
    const std::string model_text = c.model;
    auto constant = [&](int p) {
      const std::string key = "Y" + std::to_string(p + 1) + ":const";
      return model_text.find(key) != std::string::npos;
    };
    std::ostringstream odds;
    odds << R"("odds":{)";
    const double vals[3][2] = {{0.30, 0.55}, {0.45, 0.25}, {0.20, 0.40}};
    for (int p = 0; p < 3; ++p) {
      if (p) odds << ',';
      odds << "\"Y" << p + 1 << "\":[";
      if (constant(p))
        odds << vals[p][0];
      else
        odds << vals[p][0] << ',' << vals[p][1];
      odds << ']';
    }
    odds << R"(},"association":{"Y1,Y2":1.5,"Y1,Y3":0.8,"Y2,Y3":1.2,"Y1,Y2,Y3":0.05}})";
    const auto model = parse_simulation_model(doc.str() + odds.str());
    const auto table = simulate_table(model, 1e6, s++);
    const auto f = fit(table, model.spec);
    double worst = 0.0;
    for (int p = 0; p < 3; ++p)
      for (std::size_t l = 0; l < model.params.odds[p].values.size(); ++l) {
        const double truth = model.params.odds[p].values[l];
        worst = std::max(worst, std::abs(f.params.odds[p].values[l] - truth) / truth);
      }
    for (std::size_t r = 0; r < model.params.assoc.size(); ++r) {
      if (std::popcount(r) < 2) continue;
      const double truth = model.params.assoc[r];
      worst = std::max(worst, std::abs(f.params.assoc[r] - truth) / truth);
    }
    out.push_back({std::string("simulation recovers parameters within 5% (") + c.category + ", " + c.model + ")",
                   worst < 0.05, "max relative error " + fmt(worst)});
  }
  return out;
}

}  // namespace mnar::testing
