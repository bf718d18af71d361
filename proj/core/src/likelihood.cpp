#include "mnar/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "mnar/errors.hpp"

namespace mnar {

namespace {

std::vector<int> missing_positions(std::size_t pattern, int k) {
  std::vector<int> s;
  for (int p = 0; p < k; ++p)
    if (pattern_has(pattern, p, k)) s.push_back(p);
  return s;
}

std::size_t pair_pattern(int p, int q, int k) {
  return (std::size_t{1} << (k - 1 - p)) | (std::size_t{1} << (k - 1 - q));
}

}  // namespace

LikelihoodSpec::LikelihoodSpec(const IncompleteTable& table, MechanismSpec spec)
    : table_(&table), spec_(std::move(spec)) {
  validate_spec(spec_, table);
  const auto& levels = table.levels();
  for (std::size_t r = 0; r < table.num_patterns(); ++r)
    block_maps_.push_back(projection_map(levels, table.block(r).axes));
  const Shape& shape = table.cell_shape();
  std::vector<int> idx(levels.size());
  for (int p = 0; p < spec_.size(); ++p) {
    const int dep = spec_.dependency(p);
    std::vector<int> lv(shape.size(), 0);
    if (dep >= 0)
      for (std::size_t c = 0; c < shape.size(); ++c) {
        shape.unravel(c, idx);
        lv[c] = idx[dep];
      }
    dep_levels_.push_back(std::move(lv));
  }
}

std::vector<double> LikelihoodSpec::weights(const ModelParameters& params,
                                            std::size_t pattern) const {
  const auto s = missing_positions(pattern, k());
  const std::size_t n = num_cells();
  std::vector<double> w(n, 1.0);
  if (s.empty()) return w;
  if (s.size() == 1) {
    for (std::size_t c = 0; c < n; ++c) w[c] = odds_at(params, s[0], c);
  } else if (s.size() == 2) {
    const double th = params.assoc[pattern];
    for (std::size_t c = 0; c < n; ++c)
      w[c] = odds_at(params, s[0], c) * odds_at(params, s[1], c) * th;
  } else {
    std::fill(w.begin(), w.end(), params.assoc[pattern]);
  }
  return w;
}

ModelParameters LikelihoodSpec::unit_parameters() const {
  ModelParameters p;
  p.baseline.assign(num_cells(), 1.0);
  for (int q = 0; q < k(); ++q) {
    OddsVector o;
    o.dependency = spec_.dependency(q);
    o.values.assign(o.dependency < 0 ? 1 : table_->levels()[o.dependency], 1.0);
    p.odds.push_back(std::move(o));
  }
  p.assoc.assign(num_patterns(), 1.0);
  return p;
}

ModelParameters LikelihoodSpec::default_start() const {
  ModelParameters p = unit_parameters();
  const auto& y = table_->fully_observed().counts;
  for (std::size_t c = 0; c < y.size(); ++c) p.baseline[c] = y[c] > 0.0 ? y[c] : 0.5;
  const double t0 = table_->fully_observed().total();
  const double ratio = t0 > 0.0 ? (table_->total() - t0) / t0 : 1.0;
  for (auto& o : p.odds) std::fill(o.values.begin(), o.values.end(), ratio);
  return p;
}

void LikelihoodSpec::check_shape(const ModelParameters& params) const {
  if (params.baseline.size() != num_cells())
    throw ValidationError("baseline length does not match the table");
  if (params.odds.size() != static_cast<std::size_t>(k()))
    throw ValidationError("need one odds vector per missing-capable variable");
  for (int p = 0; p < k(); ++p) {
    const int dep = spec_.dependency(p);
    const std::size_t want = dep < 0 ? 1 : static_cast<std::size_t>(table_->levels()[dep]);
    if (params.odds[p].values.size() != want)
      throw ValidationError("odds vector length does not match its dependency");
  }
  if (params.assoc.size() != num_patterns())
    throw ValidationError("association vector length must equal the pattern count");
}

long long LikelihoodSpec::parameter_count() const {
  return free_parameter_count(spec_, table_->levels());
}

std::vector<std::vector<double>> expected_cells(const LikelihoodSpec& ls,
                                                const ModelParameters& params) {
  std::vector<std::vector<double>> out;
  out.reserve(ls.num_patterns());
  for (std::size_t r = 0; r < ls.num_patterns(); ++r) {
    auto w = ls.weights(params, r);
    for (std::size_t c = 0; c < w.size(); ++c) w[c] *= params.baseline[c];
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::vector<double>> expected_margins(const LikelihoodSpec& ls,
                                                  const ModelParameters& params) {
  const auto cells = expected_cells(ls, params);
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < ls.num_patterns(); ++r) {
    const auto& map = ls.block_map(r);
    std::vector<double> m(ls.table().block(r).counts.size(), 0.0);
    for (std::size_t c = 0; c < map.size(); ++c) m[map[c]] += cells[r][c];
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

double kernel(const IncompleteTable& table, const std::vector<std::vector<double>>& margins) {
  double l = 0.0;
  for (std::size_t r = 0; r < table.num_patterns(); ++r) {
    const auto& y = table.block(r).counts;
    for (std::size_t b = 0; b < y.size(); ++b) {
      const double mu = margins[r][b];
      if (y[b] > 0.0) {
        if (!(mu > 0.0)) return -std::numeric_limits<double>::infinity();
        l += y[b] * std::log(mu);
      }
      l -= mu;
    }
  }
  return l;
}

}  // namespace

double loglik(const LikelihoodSpec& ls, const ModelParameters& params) {
  return kernel(ls.table(), expected_margins(ls, params));
}

double perfect_fit_loglik(const IncompleteTable& table) {
  std::vector<std::vector<double>> margins;
  for (const auto& b : table.blocks()) margins.push_back(b.counts);
  return kernel(table, margins);
}

EmResult em_fit(const LikelihoodSpec& ls, std::optional<ModelParameters> start,
                const EmOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("EM tolerance must be positive");
  if (options.max_iter < 0) throw ValidationError("EM iteration limit must be nonnegative");
  EmResult res;
  res.params = start ? std::move(*start) : ls.default_start();
  ls.check_shape(res.params);
  auto& prm = res.params;

  const int k = ls.k();
  const std::size_t ncell = ls.num_cells();
  const std::size_t npat = ls.num_patterns();
  const auto& table = ls.table();
  std::vector<std::vector<int>> members(npat);
  for (std::size_t r = 0; r < npat; ++r) members[r] = missing_positions(r, k);

  double prev = loglik(ls, prm);
  if (!std::isfinite(prev)) throw DomainError("EM start has a non-finite log-likelihood");
  if (options.record_trace) res.trace.push_back({0, prev, table.total()});

  std::vector<std::vector<double>> z(npat, std::vector<double>(ncell));
  for (int it = 1; it <= options.max_iter; ++it) {
    // E-step
    double completed = 0.0;
    std::vector<double> wsum(ncell, 0.0);
    for (std::size_t r = 0; r < npat; ++r) {
      const auto w = ls.weights(prm, r);
      const auto& map = ls.block_map(r);
      const auto& y = table.block(r).counts;
      std::vector<double> marg(y.size(), 0.0);
      for (std::size_t c = 0; c < ncell; ++c) {
        z[r][c] = prm.baseline[c] * w[c];
        marg[map[c]] += z[r][c];
        wsum[c] += w[c];
      }
      for (std::size_t c = 0; c < ncell; ++c) {
        const double mg = marg[map[c]];
        z[r][c] = mg > 0.0 ? z[r][c] * y[map[c]] / mg : 0.0;
        completed += z[r][c];
      }
    }
    // CM: baseline
    for (std::size_t c = 0; c < ncell; ++c) {
      double num = 0.0;
      for (std::size_t r = 0; r < npat; ++r) num += z[r][c];
      prm.baseline[c] = num / wsum[c];
    }
    // CM: odds, one variable at a time
    for (int p = 0; p < k; ++p) {
      auto& vals = prm.odds[p].values;
      const auto& lv = ls.dependency_levels(p);
      std::vector<double> num(vals.size(), 0.0), den(vals.size(), 0.0);
      for (std::size_t r = 0; r < npat; ++r) {
        const auto& s = members[r];
        if (s.empty() || s.size() > 2) continue;
        if (s[0] != p && (s.size() < 2 || s[1] != p)) continue;
        for (std::size_t c = 0; c < ncell; ++c) num[lv[c]] += z[r][c];
      }
      for (std::size_t c = 0; c < ncell; ++c) {
        double f = 1.0;
        for (int q = 0; q < k; ++q) {
          if (q == p) continue;
          f += ls.odds_at(prm, q, c) * prm.assoc[pair_pattern(std::min(p, q), std::max(p, q), k)];
        }
        den[lv[c]] += prm.baseline[c] * f;
      }
      for (std::size_t l = 0; l < vals.size(); ++l)
        if (vals[l] != 0.0 && den[l] > 0.0) vals[l] = num[l] / den[l];
    }
    // CM: association
    const double msum = std::accumulate(prm.baseline.begin(), prm.baseline.end(), 0.0);
    for (std::size_t r = 0; r < npat; ++r) {
      const auto& s = members[r];
      if (s.size() < 2) continue;
      const double num = std::accumulate(z[r].begin(), z[r].end(), 0.0);
      double den = msum;
      if (s.size() == 2) {
        den = 0.0;
        for (std::size_t c = 0; c < ncell; ++c)
          den += prm.baseline[c] * ls.odds_at(prm, s[0], c) * ls.odds_at(prm, s[1], c);
      }
      if (den > 0.0) prm.assoc[r] = num / den;
    }

    const double cur = loglik(ls, prm);
    if (!std::isfinite(cur)) throw DomainError("EM produced a non-finite log-likelihood");
    if (cur < prev - 1e-9 * (1.0 + std::abs(prev))) res.monotone = false;
    res.iterations = it;
    if (options.record_trace) res.trace.push_back({it, cur, completed});
    const bool done = std::abs(cur - prev) <= options.tol * std::abs(cur);
    prev = cur;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.loglik = prev;
  return res;
}

}  // namespace mnar
