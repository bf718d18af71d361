#include "mnar/indexing.hpp"

#include <stdexcept>

namespace mnar {

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)), strides_(dims_.size()) {
  std::size_t s = 1;
  for (int a = rank() - 1; a >= 0; --a) {
    if (dims_[a] <= 0) throw std::invalid_argument("shape dimension must be positive");
    strides_[a] = s;
    s *= static_cast<std::size_t>(dims_[a]);
  }
  size_ = s;
}

std::size_t Shape::offset(std::span<const int> index) const {
  std::size_t off = 0;
  for (int a = 0; a < rank(); ++a) off += strides_[a] * static_cast<std::size_t>(index[a]);
  return off;
}

void Shape::unravel(std::size_t offset, std::span<int> index) const {
  for (int a = 0; a < rank(); ++a) {
    index[a] = static_cast<int>(offset / strides_[a]);
    offset %= strides_[a];
  }
}

std::vector<int> Shape::unravel(std::size_t offset) const {
  std::vector<int> idx(dims_.size());
  unravel(offset, idx);
  return idx;
}

std::vector<int> select_dims(const std::vector<int>& dims, const std::vector<int>& keep) {
  std::vector<int> out;
  out.reserve(keep.size());
  for (int a : keep) out.push_back(dims[a]);
  return out;
}

std::vector<std::size_t> projection_map(const std::vector<int>& dims,
                                        const std::vector<int>& keep) {
  const Shape full(dims);
  const Shape sub(select_dims(dims, keep));
  std::vector<std::size_t> map(full.size());
  std::vector<int> idx(dims.size());
  std::vector<int> sidx(keep.size());
  for (std::size_t c = 0; c < full.size(); ++c) {
    full.unravel(c, idx);
    for (std::size_t a = 0; a < keep.size(); ++a) sidx[a] = idx[keep[a]];
    map[c] = sub.offset(sidx);
  }
  return map;
}

std::vector<double> marginalize(std::span<const double> values, const std::vector<int>& dims,
                                const std::vector<int>& keep) {
  const auto map = projection_map(dims, keep);
  std::vector<double> out(Shape(select_dims(dims, keep)).size(), 0.0);
  for (std::size_t c = 0; c < map.size(); ++c) out[map[c]] += values[c];
  return out;
}

}  // namespace mnar
