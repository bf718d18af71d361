#include <cmath>
#include <limits>

#include "closed_form.hpp"
#include "mnar/errors.hpp"
#include "mnar/estimators.hpp"

namespace mnar {

namespace {

using detail::ClosedFormContext;
using Pins = std::vector<std::vector<bool>>;

bool is_nmar(const MechanismSpec& spec, int p) {
  return spec.mechanisms[p].kind == Mechanism::Kind::NMAR;
}

void clamp_small(std::vector<double>& v) {
  for (double& x : v)
    if (x < 0.0 && x >= -kNegativeTolerance) x = 0.0;
}

/// Pins the most negative NMAR component and re-solves that variable's
/// reduced system with m held fixed, until nothing negative remains.
void greedy_pin(const ClosedFormContext& cx, ModelParameters& params, Pins& pins) {
  const auto& spec = cx.ls().spec();
  while (true) {
    int worst_p = -1;
    std::size_t worst_l = 0;
    double worst = -kNegativeTolerance;
    for (int p = 0; p < cx.k(); ++p) {
      if (!is_nmar(spec, p)) continue;
      const auto& v = params.odds[p].values;
      for (std::size_t l = 0; l < v.size(); ++l)
        if (v[l] < worst) {
          worst = v[l];
          worst_p = p;
          worst_l = l;
        }
    }
    if (worst_p < 0) break;
    pins[worst_p][worst_l] = true;
    params.odds[worst_p].values = cx.solve_reduced(worst_p, params.baseline, pins[worst_p]);
    clamp_small(params.odds[worst_p].values);
  }
}

/// Two-level closed forms with `pin` forced to zero for missing position p.
ModelParameters two_level_form(const ClosedFormContext& cx, const ModelParameters& base, int p,
                               int pin, Pins& pins) {
  const auto& ls = cx.ls();
  const auto& spec = ls.spec();
  const auto& table = ls.table();
  const int v = cx.variable(p);
  const int free_level = 1 - pin;
  const std::size_t sp = cx.single(p);
  const auto& y = cx.y();
  const auto& yp = table.block(sp).counts;
  const auto& mapp = ls.block_map(sp);
  const auto& lv = cx.level_of(v);
  const auto yby = cx.by_level(y, v);
  const double t0 = cx.total(0);
  const double tp = cx.total(sp);

  ModelParameters params = base;
  auto& m = params.baseline;
  m = y;
  params.odds[p].values.assign(2, 0.0);
  pins[p].assign(2, false);
  pins[p][static_cast<std::size_t>(pin)] = true;

  const int q = cx.k() == 2 ? 1 - p : -1;
  const bool partner_mcar = q >= 0 && spec.mechanisms[q].kind == Mechanism::Kind::MCAR;
  if (!(yby[free_level] > 0.0)) throw DegenerateMarginError("empty level in boundary refit");

  if (!partner_mcar) {
    for (std::size_t c = 0; c < m.size(); ++c)
      if (lv[c] == free_level)
        m[c] = yby[free_level] * (y[c] + yp[mapp[c]]) / (yby[free_level] + tp);
    params.odds[p].values[free_level] = tp / yby[free_level];
    if (q >= 0) {
      params.odds[q].values = cx.odds(q, m);
      clamp_small(params.odds[q].values);
    }
  } else {
    const std::size_t sq = cx.single(q);
    const double tq = cx.total(sq);
    const auto yqby = cx.block_by_level(sq, v);
    if (!(yby[pin] > 0.0)) throw DegenerateMarginError("empty level in boundary refit");
    for (std::size_t c = 0; c < m.size(); ++c) {
      if (lv[c] == pin)
        m[c] = y[c] * (yby[pin] + yqby[pin]) * t0 / (yby[pin] * (t0 + tq));
      else
        m[c] = t0 * (yby[free_level] + yqby[free_level]) * (y[c] + yp[mapp[c]]) /
               ((t0 + tq) * (yby[free_level] + tp));
    }
    params.odds[p].values[free_level] =
        tp * (t0 + tq) / (t0 * (yby[free_level] + yqby[free_level]));
    params.odds[q].values = cx.odds(q, m);
  }
  greedy_pin(cx, params, pins);
  cx.fill_association(params);
  return params;
}

/// Pins `pin` for position p, re-solves, then resolves whatever else is negative.
ModelParameters pinned_resolve(const ClosedFormContext& cx, const ModelParameters& base, int p,
                               int pin, Pins& pins) {
  ModelParameters params = base;
  pins[p][static_cast<std::size_t>(pin)] = true;
  params.odds[p].values = cx.solve_reduced(p, params.baseline, pins[p]);
  clamp_small(params.odds[p].values);
  greedy_pin(cx, params, pins);
  cx.fill_association(params);
  return params;
}

std::vector<int> pinned_levels(const std::vector<bool>& pins) {
  std::vector<int> out;
  for (std::size_t l = 0; l < pins.size(); ++l)
    if (pins[l]) out.push_back(static_cast<int>(l));
  return out;
}

}  // namespace

FitResult resolve_boundary(const IncompleteTable& table, const MechanismSpec& spec,
                           const ModelParameters& unconstrained, const FitOptions& options) {
  (void)options;
  const LikelihoodSpec ls(table, spec);
  ls.check_shape(unconstrained);
  const ClosedFormContext cx(ls);
  ModelParameters base = unconstrained;
  for (auto& o : base.odds) clamp_small(o.values);

  int p = -1;
  double worst = -kNegativeTolerance;
  for (int q = 0; q < spec.size(); ++q) {
    if (!is_nmar(spec, q)) continue;
    for (double v : base.odds[q].values)
      if (v < worst) {
        worst = v;
        p = q;
      }
  }
  if (p < 0) return make_fit_result(ls, std::move(base), FitMethod::ClosedForm);

  const int var = cx.variable(p);
  const int nlev = table.levels()[var];
  const double l1 = perfect_fit_loglik(table);

  struct Candidate {
    ModelParameters params;
    Pins pins;
    double loglik = -std::numeric_limits<double>::infinity();
  };
  std::vector<Candidate> cands;
  auto fresh_pins = [&] {
    Pins pins;
    for (const auto& o : base.odds) pins.emplace_back(o.values.size(), false);
    return pins;
  };

  if (nlev == 2) {
    for (int pin = 0; pin < 2; ++pin) {
      Candidate c;
      c.pins = fresh_pins();
      try {
        c.params = spec.size() <= 2 ? two_level_form(cx, base, p, pin, c.pins)
                                    : pinned_resolve(cx, base, p, pin, c.pins);
        c.loglik = loglik(ls, c.params);
      } catch (const DegenerateMarginError&) {
        c.pins[p].assign(2, false);
        c.pins[p][static_cast<std::size_t>(pin)] = true;
      } catch (const SingularSystemError&) {
        c.pins[p].assign(2, false);
        c.pins[p][static_cast<std::size_t>(pin)] = true;
      }
      cands.push_back(std::move(c));
    }
  } else {
    Candidate c;
    c.pins = fresh_pins();
    c.params = base;
    greedy_pin(cx, c.params, c.pins);
    cx.fill_association(c.params);
    c.loglik = loglik(ls, c.params);
    cands.push_back(std::move(c));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].loglik > cands[best].loglik) best = i;
  if (!std::isfinite(cands[best].loglik))
    throw InfeasibleBoundaryError("no boundary candidate has a finite log-likelihood");

  BoundaryReport report;
  report.variable = var;
  report.zero_levels = pinned_levels(cands[best].pins[p]);
  for (const auto& c : cands)
    report.candidates.push_back({var, pinned_levels(c.pins[p]), c.loglik, 2.0 * (l1 - c.loglik)});

  auto res = make_fit_result(ls, std::move(cands[best].params), FitMethod::Boundary);
  res.boundary = std::move(report);
  return res;
}

}  // namespace mnar
