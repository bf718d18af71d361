#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mnar/table.hpp"

namespace mnar {

/// Parses the JSON table document.
IncompleteTable parse_table_json(std::string_view text);

/// Parses the long CSV format: one column per variable holding a 1-based level
/// or NA, then a count column. Levels per variable are the largest level seen;
/// a variable is missing-capable if any row has NA. Duplicate keys are summed.
IncompleteTable parse_table_csv(std::string_view text);

/// Dispatches on content: a document whose first non-blank character is '{'
/// is JSON, anything else is CSV.
IncompleteTable parse_table(std::string_view text);

IncompleteTable load_table(const std::filesystem::path& path);

/// JSON document accepted by parse_table_json. `indent` < 0 gives compact output.
std::string serialize_table(const IncompleteTable& table, int indent = 2);

}  // namespace mnar
