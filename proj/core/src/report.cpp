#include "mnar/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace mnar {

namespace {

using ojson = nlohmann::ordered_json;

ojson nest(const std::vector<double>& v, const std::vector<int>& dims, std::size_t axis,
           std::size_t& pos) {
  if (axis == dims.size()) return v[pos++];
  ojson arr = ojson::array();
  for (int i = 0; i < dims[axis]; ++i) arr.push_back(nest(v, dims, axis + 1, pos));
  return arr;
}

ojson nested(const std::vector<double>& v, const std::vector<int>& dims) {
  std::size_t pos = 0;
  return nest(v, dims, 0, pos);
}

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson pattern_json(std::size_t r, int k) {
  ojson pat = ojson::array();
  for (int p = 0; p < k; ++p) pat.push_back(pattern_has(r, p, k) ? "mis" : "obs");
  return pat;
}

std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string pattern_text(std::size_t r, int k) {
  std::string s;
  for (int p = 0; p < k; ++p) s += pattern_has(r, p, k) ? 'M' : 'O';
  return s.empty() ? "-" : s;
}

}  // namespace

std::string fit_report_json(const IncompleteTable& table, const FitResult& fit,
                            const GoodnessOfFit& gof, int indent) {
  const auto& vars = table.variables();
  ojson doc;
  doc["model"] = cli_label(fit.spec, table);
  doc["notation"] = notation_label(fit.spec, table.num_variables());
  doc["category"] = std::string(category_name(fit.spec.category()));
  doc["method"] = std::string(method_name(fit.method));
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  doc["loglik"] = number_or_null(fit.loglik);
  doc["g2"] = number_or_null(gof.g2);
  doc["df"] = gof.df;
  doc["p"] = gof.p_value ? ojson(*gof.p_value) : ojson(nullptr);
  doc["parameters"] = free_parameter_count(fit.spec, table.levels());
  if (fit.boundary) {
    ojson b;
    b["variable"] = vars[fit.boundary->variable].name;
    b["zero_levels"] = fit.boundary->zero_levels;
    b["candidates"] = ojson::array();
    for (const auto& c : fit.boundary->candidates)
      b["candidates"].push_back({{"zero_levels", c.zero_levels},
                                 {"loglik", number_or_null(c.loglik)},
                                 {"g2", number_or_null(c.g2)}});
    doc["boundary"] = b;
  } else {
    doc["boundary"] = nullptr;
  }
  doc["odds"] = ojson::array();
  for (int p = 0; p < fit.spec.size(); ++p) {
    const auto& o = fit.params.odds[p];
    const int v = fit.spec.variables[p];
    const std::string dep = o.dependency < 0 ? "const" : o.dependency == v ? "self" : vars[o.dependency].name;
    doc["odds"].push_back({{"variable", vars[v].name}, {"dependency", dep}, {"values", o.values}});
  }
  doc["association"] = ojson::array();
  const int k = fit.spec.size();
  for (std::size_t r = 0; r < fit.params.assoc.size(); ++r) {
    std::vector<std::string> members;
    for (int p = 0; p < k; ++p)
      if (pattern_has(r, p, k)) members.push_back(vars[fit.spec.variables[p]].name);
    if (members.size() < 2) continue;
    doc["association"].push_back({{"variables", members}, {"value", fit.params.assoc[r]}});
  }
  doc["baseline"] = nested(fit.params.baseline, table.levels());
  doc["expected"] = ojson::array();
  for (std::size_t r = 0; r < fit.expected.size(); ++r)
    doc["expected"].push_back(
        {{"pattern", pattern_json(r, k)}, {"cells", nested(fit.expected[r], table.levels())}});
  doc["expected_total"] = fit.expected_total();
  doc["warnings"] = fit.warnings;
  return doc.dump(indent);
}

std::string expected_table_text(const IncompleteTable& table, const FitResult& fit) {
  std::ostringstream os;
  const int n = table.num_variables();
  const int k = fit.spec.size();
  for (const auto& v : table.variables()) os << v.name << '\t';
  for (std::size_t r = 0; r < fit.expected.size(); ++r) os << pattern_text(r, k) << (r + 1 < fit.expected.size() ? "\t" : "");
  os << '\n';
  const Shape& shape = table.cell_shape();
  for (std::size_t c = 0; c < shape.size(); ++c) {
    const auto idx = shape.unravel(c);
    for (int v = 0; v < n; ++v) os << idx[v] + 1 << '\t';
    for (std::size_t r = 0; r < fit.expected.size(); ++r)
      os << fixed2(fit.expected[r][c]) << (r + 1 < fit.expected.size() ? "\t" : "");
    os << '\n';
  }
  os << "total\t" << fixed2(fit.expected_total()) << '\n';
  return os.str();
}

std::string fit_report_text(const IncompleteTable& table, const FitResult& fit,
                            const GoodnessOfFit& gof) {
  const auto& vars = table.variables();
  std::ostringstream os;
  os << "model     " << cli_label(fit.spec, table) << "  "
     << notation_label(fit.spec, table.num_variables()) << '\n';
  os << "category  " << category_name(fit.spec.category()) << '\n';
  os << "method    " << method_name(fit.method) << '\n';
  os << "boundary  " << (fit.boundary ? "yes" : "no") << '\n';
  os << "loglik    " << fixed4(fit.loglik) << '\n';
  os << "G2        " << fixed4(gof.g2) << "  df " << gof.df << "  p "
     << (gof.p_value ? fixed4(*gof.p_value) : std::string("n/a")) << '\n';
  for (int p = 0; p < fit.spec.size(); ++p) {
    const auto& o = fit.params.odds[p];
    os << "odds " << vars[fit.spec.variables[p]].name << " (";
    os << (o.dependency < 0 ? std::string("const") : vars[o.dependency].name) << ")";
    for (double v : o.values) os << ' ' << fixed4(v);
    os << '\n';
  }
  const int k = fit.spec.size();
  for (std::size_t r = 0; r < fit.params.assoc.size(); ++r) {
    std::string members;
    int count = 0;
    for (int p = 0; p < k; ++p)
      if (pattern_has(r, p, k)) {
        members += (count++ ? "," : "") + vars[fit.spec.variables[p]].name;
      }
    if (count >= 2) os << "theta " << members << ' ' << fixed4(fit.params.assoc[r]) << '\n';
  }
  for (const auto& w : fit.warnings) os << "warning   " << w << '\n';
  os << '\n' << expected_table_text(table, fit);
  return os.str();
}

std::string comparison_json(const ComparisonReport& report, int indent) {
  ojson doc;
  doc["rows"] = ojson::array();
  for (const auto& r : report.rows) {
    ojson row;
    row["model"] = r.model;
    row["notation"] = r.notation;
    row["category"] = r.category;
    row["number"] = r.number;
    row["boundary"] = r.boundary;
    row["method"] = r.method;
    row["loglik"] = r.error ? ojson(nullptr) : number_or_null(r.loglik);
    row["g2"] = r.error ? ojson(nullptr) : number_or_null(r.g2);
    row["df"] = r.df;
    row["p"] = r.p_value ? ojson(*r.p_value) : ojson(nullptr);
    if (r.error) row["error"] = *r.error;
    doc["rows"].push_back(row);
  }
  doc["best"] = report.best ? ojson(report.rows[*report.best].model) : ojson(nullptr);
  return doc.dump(indent);
}

std::string comparison_text(const ComparisonReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-18s %-9s %12s %10s %4s %8s\n", "model", "notation",
                "boundary", "loglik", "G2", "df", "p");
  os << line;
  for (const auto& r : report.rows) {
    if (r.error) {
      std::snprintf(line, sizeof line, "%-28s %-18s error: %s\n", r.model.c_str(),
                    r.notation.c_str(), r.error->c_str());
    } else {
      std::snprintf(line, sizeof line, "%-28s %-18s %-9s %12.2f %10.2f %4lld %8s\n",
                    r.model.c_str(), r.notation.c_str(), r.boundary ? "yes" : "no", r.loglik,
                    r.g2, r.df, r.p_value ? fixed4(*r.p_value).c_str() : "n/a");
    }
    os << line;
  }
  os << "best: " << (report.best ? report.rows[*report.best].model : std::string("none")) << '\n';
  return os.str();
}

std::string expected_table_json(const IncompleteTable& table, const FitResult& fit, int indent) {
  const LikelihoodSpec ls(table, fit.spec);
  const auto margins = expected_margins(ls, fit.params);
  ojson doc;
  doc["variables"] = ojson::array();
  for (const auto& v : table.variables())
    doc["variables"].push_back({{"name", v.name}, {"levels", v.levels}, {"missing", v.missing_capable}});
  doc["blocks"] = ojson::array();
  const int k = fit.spec.size();
  for (std::size_t r = 0; r < margins.size(); ++r)
    doc["blocks"].push_back({{"pattern", pattern_json(r, k)},
                             {"counts", nested(margins[r], select_dims(table.levels(), table.block(r).axes))}});
  doc["cells"] = ojson::array();
  for (std::size_t r = 0; r < fit.expected.size(); ++r)
    doc["cells"].push_back(
        {{"pattern", pattern_json(r, k)}, {"counts", nested(fit.expected[r], table.levels())}});
  doc["total"] = fit.expected_total();
  return doc.dump(indent);
}

}  // namespace mnar
