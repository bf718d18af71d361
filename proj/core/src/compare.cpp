#include "mnar/compare.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "mnar/errors.hpp"

namespace mnar {

const ComparisonRow& ComparisonReport::best_row() const {
  if (!best) throw Error("no model could be fitted");
  return rows[*best];
}

namespace {

ComparisonRow fit_row(const IncompleteTable& table, const MechanismSpec& spec,
                      const FitOptions& options) {
  ComparisonRow row;
  row.spec = spec;
  row.model = cli_label(spec, table);
  row.notation = notation_label(spec, table.num_variables());
  row.category = std::string(category_name(spec.category()));
  row.number = model_number(spec, table.num_variables());
  row.parameters = free_parameter_count(spec, table.levels());
  row.df = degrees_of_freedom(spec, table.levels());
  try {
    const auto f = fit(table, spec, options);
    const auto gof = g_squared(table, f);
    row.boundary = f.is_boundary();
    row.method = std::string(method_name(f.method));
    row.loglik = f.loglik;
    row.g2 = gof.g2;
    row.p_value = gof.p_value;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

ComparisonReport compare_models(const IncompleteTable& table, const FitOptions& options) {
  const auto specs = enumerate_models(table.num_variables(), table.missing_variables());
  std::vector<ComparisonRow> rows(specs.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, specs.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < specs.size(); i += workers)
        rows[i] = fit_row(table, specs[i], options);
    }));
  for (auto& j : jobs) j.get();
  ComparisonReport report;
  report.rows = std::move(rows);
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) { return a.model < b.model; });
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    if (r.error || !std::isfinite(r.g2)) continue;
    if (!report.best) {
      report.best = i;
      continue;
    }
    const auto& b = report.rows[*report.best];
    if (r.g2 < b.g2 || (r.g2 == b.g2 && r.parameters < b.parameters)) report.best = i;
  }
  return report;
}

}  // namespace mnar
