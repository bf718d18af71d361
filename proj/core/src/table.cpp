#include "mnar/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "mnar/errors.hpp"

namespace mnar {

ResponsePattern ResponsePattern::from_index(int k, std::size_t index) {
  std::vector<Response> e(k);
  for (int p = 0; p < k; ++p)
    e[p] = pattern_has(index, p, k) ? Response::Missing : Response::Observed;
  return ResponsePattern(std::move(e));
}

int ResponsePattern::missing_count() const {
  return static_cast<int>(std::count(entries_.begin(), entries_.end(), Response::Missing));
}

std::size_t ResponsePattern::index() const {
  std::size_t idx = 0;
  for (Response r : entries_) idx = (idx << 1U) | (r == Response::Missing ? 1U : 0U);
  return idx;
}

double ObservedBlock::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

std::vector<int> observed_axes(const std::vector<VariableMeta>& variables,
                               const ResponsePattern& pattern) {
  std::vector<int> axes;
  int pos = 0;
  for (int v = 0; v < static_cast<int>(variables.size()); ++v) {
    if (variables[v].missing_capable) {
      if (pos >= pattern.size()) throw ValidationError("response pattern is too short");
      const bool miss = pattern.missing(pos++);
      if (miss) continue;
    }
    axes.push_back(v);
  }
  if (pos != pattern.size()) throw ValidationError("response pattern is too long");
  return axes;
}

IncompleteTable::IncompleteTable(std::vector<VariableMeta> variables,
                                 std::vector<ObservedBlock> blocks)
    : variables_(std::move(variables)) {
  if (variables_.empty()) throw ValidationError("table has no variables");
  std::set<std::string> names;
  for (int v = 0; v < num_variables(); ++v) {
    const auto& meta = variables_[v];
    if (meta.name.empty()) throw ValidationError("variable name is empty");
    if (!names.insert(meta.name).second)
      throw ValidationError("duplicate variable name '" + meta.name + "'");
    if (meta.levels < 2)
      throw ValidationError("variable '" + meta.name + "' needs at least 2 levels");
    levels_.push_back(meta.levels);
    if (meta.missing_capable) missing_.push_back(v);
  }
  cell_shape_ = Shape(levels_);

  const int k = num_missing();
  const std::size_t npat = std::size_t{1} << k;
  if (blocks.size() != npat)
    throw ValidationError("expected " + std::to_string(npat) + " blocks, got " +
                          std::to_string(blocks.size()));
  blocks_.resize(npat);
  std::vector<bool> seen(npat, false);
  for (auto& b : blocks) {
    if (b.pattern.size() != k)
      throw ValidationError("block pattern length differs from the number of missing-capable variables");
    const std::size_t idx = b.pattern.index();
    if (seen[idx]) throw ValidationError("duplicate block for pattern " + std::to_string(idx));
    seen[idx] = true;
    b.axes = observed_axes(variables_, b.pattern);
    const std::size_t expected = Shape(select_dims(levels_, b.axes)).size();
    if (b.counts.size() != expected)
      throw ValidationError("block " + std::to_string(idx) + " has " +
                            std::to_string(b.counts.size()) + " counts, expected " +
                            std::to_string(expected));
    for (double c : b.counts) {
      if (!std::isfinite(c)) throw ValidationError("non-finite count");
      if (c < 0.0) throw ValidationError("negative count");
    }
    blocks_[idx] = std::move(b);
  }
  for (std::size_t idx = 0; idx < npat; ++idx) {
    const double t = blocks_[idx].total();
    if (idx > 0 && !(t > 0.0))
      throw ValidationError("supplementary block " + std::to_string(idx) +
                            " must have a positive total");
    total_ += t;
  }
  const auto zeros = std::count(blocks_[0].counts.begin(), blocks_[0].counts.end(), 0.0);
  if (zeros > 0)
    warnings_.push_back(std::to_string(zeros) +
                        " fully observed cell(s) are zero and are ignored in the likelihood");
}

IncompleteTable IncompleteTable::from_counts(std::vector<VariableMeta> variables,
                                             std::vector<std::vector<double>> counts) {
  int k = 0;
  for (const auto& v : variables) k += v.missing_capable ? 1 : 0;
  std::vector<ObservedBlock> blocks(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    blocks[i].pattern = ResponsePattern::from_index(k, i);
    blocks[i].counts = std::move(counts[i]);
  }
  return {std::move(variables), std::move(blocks)};
}

int IncompleteTable::missing_position(int variable) const {
  const auto it = std::find(missing_.begin(), missing_.end(), variable);
  return it == missing_.end() ? -1 : static_cast<int>(it - missing_.begin());
}

bool IncompleteTable::observed_under(std::size_t pattern_index, int variable) const {
  const int pos = missing_position(variable);
  return pos < 0 || !pattern_has(pattern_index, pos, num_missing());
}

const ObservedBlock& IncompleteTable::block(const ResponsePattern& pattern) const {
  if (pattern.size() != num_missing())
    throw ValidationError("pattern length differs from the number of missing-capable variables");
  return blocks_[pattern.index()];
}

int IncompleteTable::variable_index(std::string_view name) const {
  for (int v = 0; v < num_variables(); ++v)
    if (variables_[v].name == name) return v;
  throw ValidationError("unknown variable '" + std::string(name) + "'");
}

std::vector<double> IncompleteTable::block_margin(std::size_t pattern_index,
                                                  std::vector<int> keep) const {
  std::sort(keep.begin(), keep.end());
  const auto& b = blocks_.at(pattern_index);
  std::vector<int> local;
  for (int v : keep) {
    const auto it = std::find(b.axes.begin(), b.axes.end(), v);
    if (it == b.axes.end())
      throw ValidationError("variable '" + variables_[v].name + "' is not observed in block " +
                            std::to_string(pattern_index));
    local.push_back(static_cast<int>(it - b.axes.begin()));
  }
  return marginalize(b.counts, select_dims(levels_, b.axes), local);
}

double margin_sum(const IncompleteTable& table, const ResponsePattern& pattern,
                  const LevelAssignment& fixed) {
  const auto& b = table.block(pattern);
  if (fixed.size() > static_cast<std::size_t>(table.num_variables()))
    throw ValidationError("level assignment is longer than the variable list");
  for (std::size_t v = 0; v < fixed.size(); ++v) {
    if (!fixed[v]) continue;
    if (std::find(b.axes.begin(), b.axes.end(), static_cast<int>(v)) == b.axes.end())
      throw ValidationError("variable '" + table.variables()[v].name +
                            "' is summed out under this pattern");
    if (*fixed[v] < 0 || *fixed[v] >= table.levels()[v])
      throw ValidationError("level out of range for '" + table.variables()[v].name + "'");
  }
  const Shape shape(select_dims(table.levels(), b.axes));
  std::vector<int> idx(b.axes.size());
  double s = 0.0;
  for (std::size_t c = 0; c < b.counts.size(); ++c) {
    shape.unravel(c, idx);
    bool match = true;
    for (std::size_t a = 0; a < b.axes.size() && match; ++a) {
      const auto v = static_cast<std::size_t>(b.axes[a]);
      if (v < fixed.size() && fixed[v] && *fixed[v] != idx[a]) match = false;
    }
    if (match) s += b.counts[c];
  }
  return s;
}

IncompleteTable extract_subtable(const IncompleteTable& table, const std::vector<int>& keep) {
  if (keep.empty()) throw ValidationError("subtable needs at least one missing-capable variable");
  std::vector<bool> kept(table.num_variables(), false);
  for (int v : keep) {
    if (v < 0 || v >= table.num_variables() || table.missing_position(v) < 0)
      throw ValidationError("subtable variable is not missing-capable");
    kept[v] = true;
  }
  auto vars = table.variables();
  for (int v = 0; v < table.num_variables(); ++v)
    if (vars[v].missing_capable && !kept[v]) vars[v].missing_capable = false;

  const int k = table.num_missing();
  std::vector<ObservedBlock> blocks;
  for (std::size_t idx = 0; idx < table.num_patterns(); ++idx) {
    bool retain = true;
    std::vector<Response> entries;
    for (int p = 0; p < k; ++p) {
      const bool miss = pattern_has(idx, p, k);
      if (kept[table.missing_variables()[p]])
        entries.push_back(miss ? Response::Missing : Response::Observed);
      else if (miss)
        retain = false;
    }
    if (!retain) continue;
    ObservedBlock b;
    b.pattern = ResponsePattern(std::move(entries));
    b.counts = table.block(idx).counts;
    blocks.push_back(std::move(b));
  }
  return {std::move(vars), std::move(blocks)};
}

IncompleteTable extract_subtable(const IncompleteTable& table,
                                 const std::vector<std::string>& keep) {
  std::vector<int> idx;
  for (const auto& name : keep) idx.push_back(table.variable_index(name));
  return extract_subtable(table, idx);
}

}  // namespace mnar
