#include "mnar/simulate.hpp"

#include <numeric>
#include <random>

#include "json.hpp"
#include "mnar/errors.hpp"

namespace mnar {

namespace {

using nlohmann::json;

IncompleteTable unit_table(const std::vector<VariableMeta>& vars) {
  int k = 0;
  std::vector<int> levels;
  for (const auto& v : vars) {
    k += v.missing_capable ? 1 : 0;
    levels.push_back(v.levels);
  }
  std::vector<std::vector<double>> counts;
  for (std::size_t r = 0; r < (std::size_t{1} << k); ++r) {
    const auto axes = observed_axes(vars, ResponsePattern::from_index(k, r));
    counts.emplace_back(Shape(select_dims(levels, axes)).size(), 1.0);
  }
  return IncompleteTable::from_counts(vars, std::move(counts));
}

void flatten(const json& node, std::vector<double>& out) {
  if (node.is_array()) {
    for (const auto& c : node) flatten(c, out);
  } else if (node.is_number()) {
    out.push_back(node.get<double>());
  } else {
    throw ParseError("baseline entries must be numbers");
  }
}

}  // namespace

SimulationModel parse_simulation_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed parameter document: ") + e.what());
  }
  SimulationModel model;
  try {
    for (const auto& v : doc.at("variables"))
      model.variables.push_back({v.at("name").get<std::string>(), v.at("levels").get<int>(),
                                 v.value("missing", false)});
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad variable entry: ") + e.what());
  }
  const auto table = unit_table(model.variables);
  if (!doc.contains("model")) throw ParseError("parameter document needs 'model'");
  model.spec = parse_spec(doc.at("model").get<std::string>(), table);
  const LikelihoodSpec ls(table, model.spec);
  model.params = ls.unit_parameters();

  const auto& base = doc.value("baseline", json("uniform"));
  if (base.is_string()) {
    if (base.get<std::string>() != "uniform") throw ParseError("baseline must be 'uniform' or an array");
  } else {
    std::vector<double> m;
    flatten(base, m);
    if (m.size() != table.num_cells()) throw ParseError("baseline has the wrong number of cells");
    for (double v : m)
      if (!(v >= 0.0)) throw ValidationError("baseline entries must be nonnegative");
    model.params.baseline = std::move(m);
  }

  if (!doc.contains("odds")) throw ParseError("parameter document needs 'odds'");
  const auto& odds = doc.at("odds");
  for (int p = 0; p < model.spec.size(); ++p) {
    const auto& name = model.variables[model.spec.variables[p]].name;
    if (!odds.contains(name)) throw ParseError("missing odds for '" + name + "'");
    std::vector<double> vals;
    flatten(odds.at(name), vals);
    if (vals.size() != model.params.odds[p].values.size())
      throw ParseError("odds for '" + name + "' have the wrong length");
    for (double v : vals)
      if (!(v >= 0.0)) throw ValidationError("odds must be nonnegative");
    model.params.odds[p].values = std::move(vals);
  }

  if (doc.contains("association")) {
    for (const auto& [key, value] : doc.at("association").items()) {
      std::size_t pattern = 0;
      std::size_t start = 0;
      int members = 0;
      while (start <= key.size()) {
        const auto comma = key.find(',', start);
        const auto name = key.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const int pos = table.missing_position(table.variable_index(name));
        if (pos < 0) throw ValidationError("association names a variable that is never missing");
        pattern |= std::size_t{1} << (model.spec.size() - 1 - pos);
        ++members;
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (members < 2) throw ValidationError("association needs two or more variables");
      const double v = value.get<double>();
      if (!(v > 0.0)) throw ValidationError("association parameters must be positive");
      model.params.assoc[pattern] = v;
    }
  }
  return model;
}

std::vector<std::vector<double>> simulation_means(const SimulationModel& model, double total) {
  const auto table = unit_table(model.variables);
  const LikelihoodSpec ls(table, model.spec);
  ls.check_shape(model.params);
  auto params = model.params;
  if (total > 0.0) {
    const auto cells = expected_cells(ls, params);
    double sum = 0.0;
    for (const auto& r : cells) sum = std::accumulate(r.begin(), r.end(), sum);
    if (!(sum > 0.0)) throw ValidationError("model has zero expected total");
    for (double& m : params.baseline) m *= total / sum;
  }
  return expected_margins(ls, params);
}

IncompleteTable simulate_table(const SimulationModel& model, double total, std::uint64_t seed) {
  if (!(total > 0.0)) throw ValidationError("simulation total must be positive");
  const auto means = simulation_means(model, total);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> counts;
  for (const auto& block : means) {
    std::vector<double> c(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (block[i] > 0.0) {
        std::poisson_distribution<long long> pois(block[i]);
        c[i] = static_cast<double>(pois(rng));
      }
    }
    counts.push_back(std::move(c));
  }
  return IncompleteTable::from_counts(model.variables, std::move(counts));
}

}  // namespace mnar
