#include "mnar/loglinear.hpp"

#include <bit>
#include <cmath>

#include "mnar/errors.hpp"
#include "mnar/indexing.hpp"

namespace mnar {

namespace {
constexpr int kMaxAxes = 16;
}

const LoglinearEffect& LogLinearDecomposition::effect(const std::vector<int>& axes) const {
  for (const auto& e : effects)
    if (e.axes == axes) return e;
  throw ValidationError("no such log-linear effect");
}

const LoglinearEffect& LogLinearDecomposition::effect(const std::string& name) const {
  for (const auto& e : effects)
    if (e.name == name) return e;
  throw ValidationError("no log-linear effect named '" + name + "'");
}

double LogLinearDecomposition::term(const LoglinearEffect& e, const std::vector<int>& index) const {
  std::size_t off = 0;
  for (int a : e.axes) off = off * static_cast<std::size_t>(axis_dims[a]) + static_cast<std::size_t>(index[a]);
  return e.values[off];
}

double LogLinearDecomposition::reconstruct(const std::vector<int>& index) const {
  double s = 0.0;
  for (const auto& e : effects) s += term(e, index);
  return s;
}

LogLinearDecomposition decompose_loglinear(const FitResult& fit,
                                           const std::vector<std::string>& variable_names) {
  const int n = static_cast<int>(fit.levels.size());
  const int k = fit.spec.size();
  const int naxes = n + k;
  if (naxes > kMaxAxes) throw ValidationError("too many axes for a full decomposition");
  if (variable_names.size() != static_cast<std::size_t>(n))
    throw ValidationError("need one name per variable");

  LogLinearDecomposition out;
  for (int v = 0; v < n; ++v) {
    out.axis_names.push_back(variable_names[v]);
    out.axis_dims.push_back(fit.levels[v]);
  }
  for (int p = 0; p < k; ++p) {
    out.axis_names.push_back("R" + std::to_string(p + 1));
    out.axis_dims.push_back(2);
  }

  // log mu laid out over (Y..., R...), R last so offset = cell * 2^k + pattern
  const std::size_t npat = std::size_t{1} << k;
  const std::size_t ncell = fit.expected.front().size();
  std::vector<double> logmu(ncell * npat);
  for (std::size_t c = 0; c < ncell; ++c)
    for (std::size_t r = 0; r < npat; ++r) {
      const double mu = fit.expected[r][c];
      if (!(mu > 0.0)) throw DomainError("log-linear decomposition needs every expected count > 0");
      logmu[c * npat + r] = std::log(mu);
    }

  // Mean of log mu over the complement of each subset, as an array over the subset.
  const std::size_t nsub = std::size_t{1} << naxes;
  auto axes_of = [&](std::size_t mask) {
    std::vector<int> axes;
    for (int a = 0; a < naxes; ++a)
      if (mask & (std::size_t{1} << a)) axes.push_back(a);
    return axes;
  };
  std::vector<std::vector<double>> means(nsub);
  for (std::size_t mask = 0; mask < nsub; ++mask) {
    const auto axes = axes_of(mask);
    auto sums = marginalize(logmu, out.axis_dims, axes);
    const double count = static_cast<double>(logmu.size()) / static_cast<double>(sums.size());
    for (double& s : sums) s /= count;
    means[mask] = std::move(sums);
  }

  // lambda_S = sum over T subset of S of (-1)^{|S \ T|} mean_T, broadcast to S.
  for (std::size_t mask = 0; mask < nsub; ++mask) {
    LoglinearEffect e;
    e.axes = axes_of(mask);
    for (std::size_t i = 0; i < e.axes.size(); ++i) {
      if (i > 0) e.name += ':';
      e.name += out.axis_names[e.axes[i]];
    }
    const auto dims = select_dims(out.axis_dims, e.axes);
    const Shape shape(dims);
    e.values.assign(shape.size(), 0.0);
    std::vector<int> idx(e.axes.size());
    for (std::size_t sub = mask;; sub = (sub - 1) & mask) {
      const int diff = std::popcount(mask & ~sub);
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      // positions of sub's axes within e.axes
      std::vector<int> local;
      for (std::size_t i = 0; i < e.axes.size(); ++i)
        if (sub & (std::size_t{1} << e.axes[i])) local.push_back(static_cast<int>(i));
      const auto map = projection_map(dims, local);
      const auto& m = means[sub];
      for (std::size_t c = 0; c < shape.size(); ++c) e.values[c] += sign * m[map[c]];
      if (sub == 0) break;
    }
    out.effects.push_back(std::move(e));
  }
  return out;
}

}  // namespace mnar
