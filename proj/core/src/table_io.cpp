#include "mnar/table_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "mnar/errors.hpp"

namespace mnar {
namespace {

using nlohmann::json;

void flatten(const json& node, const std::vector<int>& dims, std::size_t axis,
             std::vector<double>& out) {
  if (axis == dims.size()) {
    if (!node.is_number()) throw ParseError("count must be a number");
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array() || node.size() != static_cast<std::size_t>(dims[axis]))
    throw ParseError("count array shape does not match the declared levels");
  for (const auto& child : node) flatten(child, dims, axis + 1, out);
}

nlohmann::ordered_json nest(const std::vector<double>& counts, const std::vector<int>& dims, std::size_t axis,
          std::size_t& pos) {
  if (axis == dims.size()) {
    const double v = counts[pos++];
    if (v == std::floor(v) && std::abs(v) < 9.0e15)
      return static_cast<std::int64_t>(v);
    return v;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i = 0; i < dims[axis]; ++i) arr.push_back(nest(counts, dims, axis + 1, pos));
  return arr;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

IncompleteTable parse_table_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc.contains("blocks"))
    throw ParseError("table document needs 'variables' and 'blocks'");

  std::vector<VariableMeta> vars;
  try {
    for (const auto& v : doc.at("variables")) {
      VariableMeta meta;
      meta.name = v.at("name").get<std::string>();
      meta.levels = v.at("levels").get<int>();
      meta.missing_capable = v.value("missing", false);
      vars.push_back(std::move(meta));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad variable entry: ") + e.what());
  }
  std::vector<int> levels;
  for (const auto& v : vars) {
    if (v.levels < 2) throw ValidationError("variable '" + v.name + "' needs at least 2 levels");
    levels.push_back(v.levels);
  }

  std::vector<ObservedBlock> blocks;
  for (const auto& b : doc.at("blocks")) {
    if (!b.is_object() || !b.contains("pattern") || !b.contains("counts"))
      throw ParseError("block needs 'pattern' and 'counts'");
    std::vector<Response> entries;
    for (const auto& tok : b.at("pattern")) {
      const auto s = tok.is_string() ? tok.get<std::string>() : std::string();
      if (s == "obs")
        entries.push_back(Response::Observed);
      else if (s == "mis" || s == "miss" || s == "missing")
        entries.push_back(Response::Missing);
      else
        throw ParseError("pattern entries must be \"obs\" or \"mis\"");
    }
    ObservedBlock block;
    block.pattern = ResponsePattern(std::move(entries));
    const auto axes = observed_axes(vars, block.pattern);
    flatten(b.at("counts"), select_dims(levels, axes), 0, block.counts);
    blocks.push_back(std::move(block));
  }
  return {std::move(vars), std::move(blocks)};
}

IncompleteTable parse_table_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto nl = text.find('\n', start);
      const auto line = trim(text.substr(start, nl - start));
      if (!line.empty() && line.front() != '#') lines.push_back(line);
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  if (lines.size() < 2) throw ParseError("CSV needs a header and at least one row");
  const auto header = split(lines[0]);
  if (header.size() < 2) throw ParseError("CSV needs at least one variable column and a count");
  const std::size_t nvar = header.size() - 1;

  std::map<std::vector<int>, double> rows;  // level 0 encodes NA
  std::vector<int> max_level(nvar, 0);
  std::vector<bool> has_na(nvar, false);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r]);
    if (fields.size() != header.size())
      throw ParseError("CSV row " + std::to_string(r + 1) + " has the wrong number of fields");
    std::vector<int> key(nvar);
    for (std::size_t v = 0; v < nvar; ++v) {
      if (fields[v] == "NA") {
        has_na[v] = true;
        key[v] = 0;
        continue;
      }
      int level = 0;
      const auto res = std::from_chars(fields[v].data(), fields[v].data() + fields[v].size(), level);
      if (res.ec != std::errc() || res.ptr != fields[v].data() + fields[v].size() || level < 1)
        throw ParseError("bad level '" + std::string(fields[v]) + "' in CSV row " +
                         std::to_string(r + 1));
      key[v] = level;
      max_level[v] = std::max(max_level[v], level);
    }
    double count = 0.0;
    try {
      std::size_t used = 0;
      const std::string cs(fields[nvar]);
      count = std::stod(cs, &used);
      if (used != cs.size()) throw std::invalid_argument(cs);
    } catch (const std::exception&) {
      throw ParseError("bad count in CSV row " + std::to_string(r + 1));
    }
    if (count < 0.0) throw ValidationError("negative count in CSV row " + std::to_string(r + 1));
    rows[key] += count;
  }

  std::vector<VariableMeta> vars(nvar);
  std::vector<int> missing;
  for (std::size_t v = 0; v < nvar; ++v) {
    vars[v].name = std::string(header[v]);
    vars[v].levels = std::max(max_level[v], 2);
    vars[v].missing_capable = has_na[v];
    if (has_na[v]) missing.push_back(static_cast<int>(v));
  }
  std::vector<int> levels;
  for (const auto& v : vars) levels.push_back(v.levels);

  const int k = static_cast<int>(missing.size());
  std::vector<ObservedBlock> blocks(std::size_t{1} << k);
  std::vector<Shape> shapes;
  for (std::size_t idx = 0; idx < blocks.size(); ++idx) {
    blocks[idx].pattern = ResponsePattern::from_index(k, idx);
    const auto axes = observed_axes(vars, blocks[idx].pattern);
    shapes.emplace_back(select_dims(levels, axes));
    blocks[idx].counts.assign(shapes.back().size(), 0.0);
  }
  for (const auto& [key, count] : rows) {
    std::size_t idx = 0;
    std::vector<int> sub;
    for (std::size_t v = 0; v < nvar; ++v) {
      if (vars[v].missing_capable) idx = (idx << 1U) | (key[v] == 0 ? 1U : 0U);
      if (key[v] != 0) sub.push_back(key[v] - 1);
    }
    blocks[idx].counts[shapes[idx].offset(sub)] += count;
  }
  return {std::move(vars), std::move(blocks)};
}

IncompleteTable parse_table(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_table_json(text);
  return parse_table_csv(text);
}

IncompleteTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str());
}

std::string serialize_table(const IncompleteTable& table, int indent) {
  nlohmann::ordered_json doc;
  doc["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : table.variables())
    doc["variables"].push_back(
        {{"name", v.name}, {"levels", v.levels}, {"missing", v.missing_capable}});
  doc["blocks"] = nlohmann::ordered_json::array();
  for (const auto& b : table.blocks()) {
    nlohmann::ordered_json pat = nlohmann::ordered_json::array();
    for (Response r : b.pattern.entries()) pat.push_back(r == Response::Missing ? "mis" : "obs");
    std::size_t pos = 0;
    doc["blocks"].push_back(
        {{"pattern", pat}, {"counts", nest(b.counts, select_dims(table.levels(), b.axes), 0, pos)}});
  }
  return doc.dump(indent);
}

}  // namespace mnar
