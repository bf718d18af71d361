#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mnar/likelihood.hpp"
#include "mnar/model_space.hpp"
#include "mnar/table.hpp"

namespace mnar {

struct SimulationModel {
  std::vector<VariableMeta> variables;
  MechanismSpec spec;
  ModelParameters params;
};

/// Parses a parameter document:
///   {"variables":[...], "model":"Y1:const",
///    "baseline":"uniform" | nested array over all variables,
///    "odds":{"Y1":[0.1]}, "association":{"Y1,Y2":1.0}}
/// Association entries default to 1.
SimulationModel parse_simulation_model(std::string_view text);

/// Expected counts per block with the baseline rescaled so the expected
/// grand total is `total` (no rescaling when total <= 0).
std::vector<std::vector<double>> simulation_means(const SimulationModel& model, double total);

/// Independent Poisson draws around simulation_means, seeded mt19937_64.
IncompleteTable simulate_table(const SimulationModel& model, double total, std::uint64_t seed);

}  // namespace mnar
