#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mnar/table.hpp"

namespace mnar {

struct Mechanism {
  enum class Kind { NMAR, MAR, MCAR };
  Kind kind = Kind::MCAR;
  int target = -1;  // variable index, MAR only

  static Mechanism nmar() { return {Kind::NMAR, -1}; }
  static Mechanism mar(int target) { return {Kind::MAR, target}; }
  static Mechanism mcar() { return {Kind::MCAR, -1}; }

  bool operator==(const Mechanism&) const = default;
};

enum class ModelCategory { MCAR, NMAR, MAR, MCAR_NMAR, MCAR_MAR, NMAR_MAR, NMAR_MAR_MCAR };

std::string_view category_name(ModelCategory c);

/// One mechanism per missing-capable variable.
struct MechanismSpec {
  std::vector<int> variables;  // missing-capable variable indices, declaration order
  std::vector<Mechanism> mechanisms;

  [[nodiscard]] int size() const { return static_cast<int>(variables.size()); }
  /// Variable whose level the odds of missing-capable position p depend on; -1 for MCAR.
  [[nodiscard]] int dependency(int p) const;
  [[nodiscard]] ModelCategory category() const;
  [[nodiscard]] bool all_mcar() const;
  [[nodiscard]] bool any_mcar() const;

  bool operator==(const MechanismSpec&) const = default;
};

/// Throws ValidationError unless `spec` matches the table's missing set and
/// every MAR target is another variable of the table.
void validate_spec(const MechanismSpec& spec, const IncompleteTable& table);

/// All (n+1)^k specs. The first missing variable varies slowest; each
/// variable runs through MCAR, then dependencies on Y1..Yn in order (its own
/// index being NMAR).
std::vector<MechanismSpec> enumerate_models(int n, const std::vector<int>& missing);

/// 1-based position of `spec` in enumerate_models order. For three variables
/// with two missing this is the conventional model number 1..16.
std::size_t model_number(const MechanismSpec& spec, int n);

/// Baseline cells + odds parameters + association parameters.
long long free_parameter_count(const MechanismSpec& spec, const std::vector<int>& dims);

/// Observable cells minus free parameters. Negative means the model cannot be
/// tested against the perfect fit.
long long degrees_of_freedom(const MechanismSpec& spec, const std::vector<int>& dims);

/// Number of observable cells: product over variables of I (always observed)
/// or 1 + I (missing-capable).
long long observable_cells(const MechanismSpec& spec, const std::vector<int>& dims);

/// CLI syntax, e.g. "Y1:Y2,Y2:self".
std::string cli_label(const MechanismSpec& spec, const std::vector<std::string>& names);
std::string cli_label(const MechanismSpec& spec, const IncompleteTable& table);

/// Conventional notation, e.g. "(a.j.,b.j.)": one letter per missing variable
/// (a, b, c, ...), with the dependency position written as i, j, k, ...
std::string notation_label(const MechanismSpec& spec, int n);

/// Parses CLI syntax against a table. Every missing-capable variable must be
/// given exactly once.
MechanismSpec parse_spec(std::string_view text, const IncompleteTable& table);

}  // namespace mnar
