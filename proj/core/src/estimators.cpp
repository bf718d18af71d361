#include "mnar/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "closed_form.hpp"
#include "mnar/errors.hpp"

namespace mnar {

std::string_view method_name(FitMethod m) {
  switch (m) {
    case FitMethod::ClosedForm: return "closed-form";
    case FitMethod::EM: return "EM";
    case FitMethod::Boundary: return "boundary";
  }
  return "?";
}

double FitResult::expected_total() const {
  double s = 0.0;
  for (const auto& r : expected) s = std::accumulate(r.begin(), r.end(), s);
  return s;
}

namespace detail {

namespace {

double safe_div(double num, double den, const char* what) {
  if (!(den > 0.0)) throw DegenerateMarginError(std::string("zero margin in ") + what);
  return num / den;
}

std::vector<int> all_but(int n, int var) {
  std::vector<int> keep;
  for (int v = 0; v < n; ++v)
    if (v != var) keep.push_back(v);
  return keep;
}

}  // namespace

ClosedFormContext::ClosedFormContext(const LikelihoodSpec& ls) : ls_(&ls) {
  const auto& table = ls.table();
  for (const auto& b : table.blocks()) totals_.push_back(b.total());
  const Shape& shape = table.cell_shape();
  level_of_.assign(table.num_variables(), std::vector<int>(shape.size()));
  std::vector<int> idx(table.num_variables());
  for (std::size_t c = 0; c < shape.size(); ++c) {
    shape.unravel(c, idx);
    for (int v = 0; v < table.num_variables(); ++v) level_of_[v][c] = idx[v];
  }
}

std::vector<double> ClosedFormContext::by_level(const std::vector<double>& full, int var) const {
  return marginalize(full, levels(), {var});
}

std::vector<double> ClosedFormContext::block_by_level(std::size_t pattern, int var) const {
  return ls_->table().block_margin(pattern, {var});
}

std::vector<double> ClosedFormContext::mcar_factor(int p) const {
  const int v = variable(p);
  const std::size_t s = single(p);
  const auto ym = marginalize(y(), levels(), all_but(static_cast<int>(levels().size()), v));
  const auto& ys = ls_->table().block(s).counts;
  const auto& map = ls_->block_map(s);
  const double scale = total(0) / (total(0) + total(s));
  std::vector<double> f(map.size());
  for (std::size_t c = 0; c < map.size(); ++c)
    f[c] = safe_div(ym[map[c]] + ys[map[c]], ym[map[c]], "MCAR baseline") * scale;
  return f;
}

std::vector<double> ClosedFormContext::mar_factor(int p, int target) const {
  const int v = variable(p);
  const std::size_t s = single(p);
  const auto ym = marginalize(y(), levels(), all_but(static_cast<int>(levels().size()), v));
  const auto& ys = ls_->table().block(s).counts;
  const auto& map = ls_->block_map(s);
  const auto y0t = by_level(y(), target);
  const auto yst = block_by_level(s, target);
  const auto& lt = level_of(target);
  std::vector<double> f(map.size());
  for (std::size_t c = 0; c < map.size(); ++c) {
    const int l = lt[c];
    f[c] = safe_div(ym[map[c]] + ys[map[c]], ym[map[c]], "MAR baseline") *
           safe_div(y0t[l], y0t[l] + yst[l], "MAR baseline");
  }
  return f;
}

OddsSystem ClosedFormContext::odds_system(int p, const std::vector<double>& m) const {
  const int v = variable(p);
  const std::size_t s = single(p);
  const auto& ys = ls_->table().block(s).counts;
  const auto& map = ls_->block_map(s);
  const auto& lv = level_of(v);
  OddsSystem sys;
  sys.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ys.size()), levels()[v]);
  sys.rhs = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t c = 0; c < map.size(); ++c)
    sys.matrix(static_cast<Eigen::Index>(map[c]), lv[c]) = m[c];
  return sys;
}

std::vector<double> ClosedFormContext::solve_reduced(int p, const std::vector<double>& m,
                                                     const std::vector<bool>& pinned) const {
  const auto full = odds_system(p, m);
  std::vector<Eigen::Index> free_cols;
  for (Eigen::Index j = 0; j < full.matrix.cols(); ++j)
    if (!pinned[static_cast<std::size_t>(j)]) free_cols.push_back(j);
  if (free_cols.empty()) throw InfeasibleBoundaryError("every odds level would be pinned to zero");
  OddsSystem red;
  red.matrix.resize(full.matrix.rows(), static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t j = 0; j < free_cols.size(); ++j)
    red.matrix.col(static_cast<Eigen::Index>(j)) = full.matrix.col(free_cols[j]);
  red.rhs = full.rhs;
  const auto sol = solve_odds_system(red);
  std::vector<double> out(pinned.size(), 0.0);
  for (std::size_t j = 0; j < free_cols.size(); ++j)
    out[static_cast<std::size_t>(free_cols[j])] = sol.x(static_cast<Eigen::Index>(j));
  return out;
}

std::vector<double> ClosedFormContext::odds(int p, const std::vector<double>& m) const {
  const auto& mech = ls_->spec().mechanisms[p];
  const std::size_t s = single(p);
  switch (mech.kind) {
    case Mechanism::Kind::MCAR:
      return {safe_div(total(s), total(0), "MCAR odds")};
    case Mechanism::Kind::MAR: {
      const auto num = block_by_level(s, mech.target);
      const auto den = by_level(m, mech.target);
      std::vector<double> out(num.size());
      for (std::size_t l = 0; l < num.size(); ++l) out[l] = safe_div(num[l], den[l], "MAR odds");
      return out;
    }
    case Mechanism::Kind::NMAR: {
      const auto sol = solve_odds_system(odds_system(p, m));
      return {sol.x.data(), sol.x.data() + sol.x.size()};
    }
  }
  return {};
}

void ClosedFormContext::fill_association(ModelParameters& params) const {
  const auto& spec = ls_->spec();
  const std::size_t npat = ls_->num_patterns();
  const double msum = std::accumulate(params.baseline.begin(), params.baseline.end(), 0.0);
  for (std::size_t r = 0; r < npat; ++r) {
    std::vector<int> s;
    for (int p = 0; p < k(); ++p)
      if (pattern_has(r, p, k())) s.push_back(p);
    if (s.size() < 2) {
      params.assoc[r] = 1.0;
      continue;
    }
    if (s.size() > 2) {
      params.assoc[r] = safe_div(total(r), msum, "association");
      continue;
    }
    const int p = s[0], q = s[1];
    if (spec.mechanisms[p].kind == Mechanism::Kind::MCAR ||
        spec.mechanisms[q].kind == Mechanism::Kind::MCAR) {
      params.assoc[r] =
          safe_div(total(0) * total(r), total(single(p)) * total(single(q)), "association");
    } else {
      double den = 0.0;
      for (std::size_t c = 0; c < params.baseline.size(); ++c)
        den += params.baseline[c] * ls_->odds_at(params, p, c) * ls_->odds_at(params, q, c);
      params.assoc[r] = safe_div(total(r), den, "association");
    }
  }
}

}  // namespace detail

namespace {

using detail::ClosedFormContext;

/// Clamps tiny negatives; reports whether a real negative NMAR component remains.
bool clamp_negatives(ModelParameters& params, const MechanismSpec& spec) {
  bool negative = false;
  for (int p = 0; p < spec.size(); ++p)
    for (double& v : params.odds[p].values) {
      if (v < -kNegativeTolerance) {
        if (spec.mechanisms[p].kind == Mechanism::Kind::NMAR) negative = true;
      } else if (v < 0.0) {
        v = 0.0;
      }
    }
  return negative;
}

FitResult finish_closed_form(const IncompleteTable& table, const MechanismSpec& spec,
                             ModelParameters params, const FitOptions& options) {
  if (clamp_negatives(params, spec)) return resolve_boundary(table, spec, params, options);
  const LikelihoodSpec ls(table, spec);
  return make_fit_result(ls, std::move(params), FitMethod::ClosedForm);
}

ModelParameters closed_form_with_baseline(const ClosedFormContext& cx, std::vector<double> m) {
  ModelParameters params = cx.ls().unit_parameters();
  params.baseline = std::move(m);
  bool negative = false;
  for (int p = 0; p < cx.k(); ++p) {
    params.odds[p].values = cx.odds(p, params.baseline);
    for (double v : params.odds[p].values) negative = negative || v < -kNegativeTolerance;
  }
  if (negative)
    std::fill(params.assoc.begin(), params.assoc.end(), std::numeric_limits<double>::quiet_NaN());
  else
    cx.fill_association(params);
  return params;
}

/// Printed iteration for the baseline when both variables are MCAR.
FitResult fit_two_mcar(const IncompleteTable& table, const MechanismSpec& spec,
                       const FitOptions& options) {
  const LikelihoodSpec ls(table, spec);
  const ClosedFormContext cx(ls);
  ModelParameters params = ls.unit_parameters();
  params.odds[0].values = cx.odds(0, cx.y());
  params.odds[1].values = cx.odds(1, cx.y());
  cx.fill_association(params);

  const std::size_t sa = cx.single(0), sb = cx.single(1);
  const auto& ya = table.block(sa).counts;
  const auto& yb = table.block(sb).counts;
  const auto& mapa = ls.block_map(sa);
  const auto& mapb = ls.block_map(sb);
  const auto& keepa = table.block(sa).axes;
  const auto& keepb = table.block(sb).axes;
  const double t0 = cx.total(0);
  const double scale = t0 / (t0 + cx.total(sa) + cx.total(sb));
  const auto& y = cx.y();

  auto& m = params.baseline;
  m = y;
  double prev = loglik(ls, params);
  int it = 0;
  bool converged = false;
  std::vector<double> next(m.size());
  while (it < options.max_iter) {
    ++it;
    const auto ma = marginalize(m, table.levels(), keepa);
    const auto mb = marginalize(m, table.levels(), keepb);
    for (std::size_t c = 0; c < m.size(); ++c) {
      double v = y[c];
      if (mb[mapb[c]] > 0.0) v += yb[mapb[c]] * m[c] / mb[mapb[c]];
      if (ma[mapa[c]] > 0.0) v += ya[mapa[c]] * m[c] / ma[mapa[c]];
      next[c] = scale * v;
    }
    m.swap(next);
    const double cur = loglik(ls, params);
    const bool done = std::abs(cur - prev) <= options.tol * std::abs(cur);
    prev = cur;
    if (done) {
      converged = true;
      break;
    }
  }
  auto res = make_fit_result(ls, std::move(params), FitMethod::EM);
  res.iterations = it;
  res.converged = converged;
  if (!converged) res.warnings.push_back("baseline iteration hit the iteration limit");
  return res;
}

FitResult polish_guard(const IncompleteTable& table, const MechanismSpec& spec, FitResult cf,
                       const FitOptions& options) {
  if (!options.polish_guard) return cf;
  const LikelihoodSpec ls(table, spec);
  EmOptions eo;
  eo.tol = options.tol;
  eo.max_iter = options.max_iter;
  auto em = em_fit(ls, cf.params, eo);
  const double gain = em.loglik - cf.loglik;
  if (!(gain > options.guard_threshold)) return cf;
  auto res = make_fit_result(ls, std::move(em.params), FitMethod::EM);
  res.iterations = em.iterations;
  res.converged = em.converged;
  res.boundary = std::move(cf.boundary);
  std::ostringstream msg;
  msg << "closed-form candidate is not stationary (EM gained " << gain
      << " in log-likelihood); returning the EM fit";
  res.warnings.push_back(msg.str());
  if (!em.converged) res.warnings.push_back("EM hit the iteration limit");
  return res;
}

}  // namespace

FitResult make_fit_result(const LikelihoodSpec& ls, ModelParameters params, FitMethod method) {
  FitResult res;
  res.spec = ls.spec();
  res.levels = ls.table().levels();
  res.expected = expected_cells(ls, params);
  res.loglik = loglik(ls, params);
  res.params = std::move(params);
  res.method = method;
  if (!std::isfinite(res.loglik))
    res.warnings.push_back("an expected margin is zero where counts were observed");
  return res;
}

ModelParameters closed_form_parameters(const IncompleteTable& table, const MechanismSpec& spec) {
  const LikelihoodSpec ls(table, spec);
  const ClosedFormContext cx(ls);
  const int k = ls.k();
  if (k < 1 || k > 3) throw ValidationError("closed forms cover one to three missing variables");
  std::vector<double> m = cx.y();
  if (k == 1) {
    const auto& mech = spec.mechanisms[0];
    if (mech.kind != Mechanism::Kind::NMAR) {
      const auto f = mech.kind == Mechanism::Kind::MCAR ? cx.mcar_factor(0)
                                                        : cx.mar_factor(0, mech.target);
      for (std::size_t c = 0; c < m.size(); ++c) m[c] *= f[c];
    }
    return closed_form_with_baseline(cx, std::move(m));
  }
  if (spec.all_mcar()) throw ValidationError("no closed-form baseline when every variable is MCAR");
  for (int p = 0; p < k; ++p) {
    if (spec.mechanisms[p].kind != Mechanism::Kind::MCAR) continue;
    const auto f = cx.mcar_factor(p);
    for (std::size_t c = 0; c < m.size(); ++c) m[c] *= f[c];
  }
  return closed_form_with_baseline(cx, std::move(m));
}

FitResult fit_one_missing(const IncompleteTable& table, const MechanismSpec& spec,
                          const FitOptions& options) {
  validate_spec(spec, table);
  if (spec.size() != 1) throw ValidationError("expected exactly one missing-capable variable");
  return finish_closed_form(table, spec, closed_form_parameters(table, spec), options);
}

FitResult fit_two_missing(const IncompleteTable& table, const MechanismSpec& spec,
                          const FitOptions& options) {
  validate_spec(spec, table);
  if (spec.size() != 2) throw ValidationError("expected exactly two missing-capable variables");
  if (spec.all_mcar()) return fit_two_mcar(table, spec, options);
  return finish_closed_form(table, spec, closed_form_parameters(table, spec), options);
}

FitResult fit_three_missing(const IncompleteTable& table, const MechanismSpec& spec,
                            const FitOptions& options) {
  validate_spec(spec, table);
  if (spec.size() != 3) throw ValidationError("expected exactly three missing-capable variables");
  if (spec.all_mcar()) return fit_em(table, spec, options);
  auto cf = finish_closed_form(table, spec, closed_form_parameters(table, spec), options);
  return polish_guard(table, spec, std::move(cf), options);
}

FitResult fit_em(const IncompleteTable& table, const MechanismSpec& spec,
                 const FitOptions& options) {
  const LikelihoodSpec ls(table, spec);
  EmOptions eo;
  eo.tol = options.tol;
  eo.max_iter = options.max_iter;
  auto em = em_fit(ls, std::nullopt, eo);
  auto res = make_fit_result(ls, std::move(em.params), FitMethod::EM);
  res.iterations = em.iterations;
  res.converged = em.converged;
  if (!em.converged) res.warnings.push_back("EM hit the iteration limit");
  if (!em.monotone) res.warnings.push_back("EM log-likelihood decreased at some iteration");
  return res;
}

FitResult fit(const IncompleteTable& table, const MechanismSpec& spec, const FitOptions& options) {
  validate_spec(spec, table);
  const int k = spec.size();
  if (k == 0) throw ValidationError("table has no missing-capable variables");
  if (options.force_em || k >= 4) return fit_em(table, spec, options);
  switch (k) {
    case 1: return fit_one_missing(table, spec, options);
    case 2: return fit_two_missing(table, spec, options);
    default: return fit_three_missing(table, spec, options);
  }
}

}  // namespace mnar
