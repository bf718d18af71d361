#include "mnar/model_space.hpp"

#include <algorithm>
#include <sstream>

#include "mnar/errors.hpp"

namespace mnar {

std::string_view category_name(ModelCategory c) {
  switch (c) {
    case ModelCategory::MCAR: return "MCAR";
    case ModelCategory::NMAR: return "NMAR";
    case ModelCategory::MAR: return "MAR";
    case ModelCategory::MCAR_NMAR: return "MCAR+NMAR";
    case ModelCategory::MCAR_MAR: return "MCAR+MAR";
    case ModelCategory::NMAR_MAR: return "NMAR+MAR";
    case ModelCategory::NMAR_MAR_MCAR: return "NMAR+MAR+MCAR";
  }
  return "?";
}

int MechanismSpec::dependency(int p) const {
  const auto& m = mechanisms[p];
  switch (m.kind) {
    case Mechanism::Kind::NMAR: return variables[p];
    case Mechanism::Kind::MAR: return m.target;
    case Mechanism::Kind::MCAR: return -1;
  }
  return -1;
}

ModelCategory MechanismSpec::category() const {
  bool n = false, a = false, c = false;
  for (const auto& m : mechanisms) {
    n |= m.kind == Mechanism::Kind::NMAR;
    a |= m.kind == Mechanism::Kind::MAR;
    c |= m.kind == Mechanism::Kind::MCAR;
  }
  if (n && a && c) return ModelCategory::NMAR_MAR_MCAR;
  if (n && a) return ModelCategory::NMAR_MAR;
  if (a && c) return ModelCategory::MCAR_MAR;
  if (n && c) return ModelCategory::MCAR_NMAR;
  if (a) return ModelCategory::MAR;
  if (n) return ModelCategory::NMAR;
  return ModelCategory::MCAR;
}

bool MechanismSpec::all_mcar() const {
  return std::all_of(mechanisms.begin(), mechanisms.end(),
                     [](const Mechanism& m) { return m.kind == Mechanism::Kind::MCAR; });
}

bool MechanismSpec::any_mcar() const {
  return std::any_of(mechanisms.begin(), mechanisms.end(),
                     [](const Mechanism& m) { return m.kind == Mechanism::Kind::MCAR; });
}

void validate_spec(const MechanismSpec& spec, const IncompleteTable& table) {
  if (spec.variables != table.missing_variables())
    throw ValidationError("model does not match the table's missing-capable variables");
  if (spec.mechanisms.size() != spec.variables.size())
    throw ValidationError("model needs one mechanism per missing-capable variable");
  for (int p = 0; p < spec.size(); ++p) {
    const auto& m = spec.mechanisms[p];
    if (m.kind != Mechanism::Kind::MAR) continue;
    if (m.target < 0 || m.target >= table.num_variables())
      throw ValidationError("MAR target out of range");
    if (m.target == spec.variables[p])
      throw ValidationError("MAR target must differ from the variable itself");
  }
}

namespace {

Mechanism mechanism_from_choice(int choice, int variable) {
  if (choice == 0) return Mechanism::mcar();
  const int dep = choice - 1;
  return dep == variable ? Mechanism::nmar() : Mechanism::mar(dep);
}

int choice_of(const MechanismSpec& spec, int p) {
  const int dep = spec.dependency(p);
  return dep < 0 ? 0 : dep + 1;
}

}  // namespace

std::vector<MechanismSpec> enumerate_models(int n, const std::vector<int>& missing) {
  const int k = static_cast<int>(missing.size());
  if (k == 0) throw ValidationError("no missing-capable variables to model");
  if (k > n) throw ValidationError("more missing variables than variables");
  for (int v : missing)
    if (v < 0 || v >= n) throw ValidationError("missing variable index out of range");
  std::size_t total = 1;
  for (int p = 0; p < k; ++p) total *= static_cast<std::size_t>(n + 1);
  std::vector<MechanismSpec> out;
  out.reserve(total);
  std::vector<int> choice(k, 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (int p = k - 1; p >= 0; --p) {
      choice[p] = static_cast<int>(rem % static_cast<std::size_t>(n + 1));
      rem /= static_cast<std::size_t>(n + 1);
    }
    MechanismSpec s;
    s.variables = missing;
    for (int p = 0; p < k; ++p) s.mechanisms.push_back(mechanism_from_choice(choice[p], missing[p]));
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t model_number(const MechanismSpec& spec, int n) {
  std::size_t idx = 0;
  for (int p = 0; p < spec.size(); ++p)
    idx = idx * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(choice_of(spec, p));
  return idx + 1;
}

long long free_parameter_count(const MechanismSpec& spec, const std::vector<int>& dims) {
  long long cells = 1;
  for (int d : dims) cells *= d;
  long long odds = 0;
  for (int p = 0; p < spec.size(); ++p) {
    const int dep = spec.dependency(p);
    odds += dep < 0 ? 1 : dims.at(dep);
  }
  const int k = spec.size();
  const long long assoc = (1LL << k) - k - 1;  // pairwise plus higher-order
  return cells + odds + assoc;
}

long long observable_cells(const MechanismSpec& spec, const std::vector<int>& dims) {
  long long cells = 1;
  for (int v = 0; v < static_cast<int>(dims.size()); ++v) {
    const bool miss = std::find(spec.variables.begin(), spec.variables.end(), v) != spec.variables.end();
    cells *= miss ? 1 + dims[v] : dims[v];
  }
  return cells;
}

long long degrees_of_freedom(const MechanismSpec& spec, const std::vector<int>& dims) {
  return observable_cells(spec, dims) - free_parameter_count(spec, dims);
}

std::string cli_label(const MechanismSpec& spec, const std::vector<std::string>& names) {
  std::string out;
  for (int p = 0; p < spec.size(); ++p) {
    if (p > 0) out += ',';
    out += names.at(spec.variables[p]);
    out += ':';
    const auto& m = spec.mechanisms[p];
    if (m.kind == Mechanism::Kind::NMAR)
      out += "self";
    else if (m.kind == Mechanism::Kind::MCAR)
      out += "const";
    else
      out += names.at(m.target);
  }
  return out;
}

std::string cli_label(const MechanismSpec& spec, const IncompleteTable& table) {
  std::vector<std::string> names;
  for (const auto& v : table.variables()) names.push_back(v.name);
  return cli_label(spec, names);
}

std::string notation_label(const MechanismSpec& spec, int n) {
  std::string out;
  const bool wrap = spec.size() > 1;
  if (wrap) out += '(';
  for (int p = 0; p < spec.size(); ++p) {
    if (p > 0) out += ',';
    out += static_cast<char>('a' + p);
    const int dep = spec.dependency(p);
    for (int v = 0; v < n; ++v) out += v == dep ? static_cast<char>('i' + v) : '.';
  }
  if (wrap) out += ')';
  return out;
}

MechanismSpec parse_spec(std::string_view text, const IncompleteTable& table) {
  const auto& missing = table.missing_variables();
  if (missing.empty()) throw ValidationError("table has no missing-capable variables");
  std::vector<bool> given(missing.size(), false);
  MechanismSpec spec;
  spec.variables = missing;
  spec.mechanisms.assign(missing.size(), Mechanism::mcar());

  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma - start));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("model item '" + std::string(item) + "' needs the form VAR:MECHANISM");
    const auto var = trim(item.substr(0, colon));
    const auto mech = trim(item.substr(colon + 1));
    const int v = table.variable_index(var);
    const int p = table.missing_position(v);
    if (p < 0) throw ValidationError("variable '" + std::string(var) + "' is never missing");
    if (given[p]) throw ValidationError("variable '" + std::string(var) + "' given twice");
    given[p] = true;
    if (mech == "self") {
      spec.mechanisms[p] = Mechanism::nmar();
    } else if (mech == "const") {
      spec.mechanisms[p] = Mechanism::mcar();
    } else {
      const int t = table.variable_index(mech);
      spec.mechanisms[p] = t == v ? Mechanism::nmar() : Mechanism::mar(t);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (std::size_t p = 0; p < given.size(); ++p)
    if (!given[p])
      throw ValidationError("model omits variable '" + table.variables()[missing[p]].name + "'");
  return spec;
}

}  // namespace mnar
