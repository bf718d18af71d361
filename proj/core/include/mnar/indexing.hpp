#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mnar {

/// Row-major shape of a dense array; the last axis varies fastest.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> dims);

  [[nodiscard]] int rank() const { return static_cast<int>(dims_.size()); }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] const std::vector<int>& dims() const { return dims_; }
  [[nodiscard]] std::size_t stride(int axis) const { return strides_[axis]; }

  [[nodiscard]] std::size_t offset(std::span<const int> index) const;
  void unravel(std::size_t offset, std::span<int> index) const;
  [[nodiscard]] std::vector<int> unravel(std::size_t offset) const;

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// For every cell of an array over `dims`, the offset of its projection onto
/// `keep` (a sorted subset of axes) in the row-major array over those axes.
std::vector<std::size_t> projection_map(const std::vector<int>& dims,
                                        const std::vector<int>& keep);

/// Sums `values` (row-major over `dims`) down to the axes in `keep`.
std::vector<double> marginalize(std::span<const double> values,
                                const std::vector<int>& dims,
                                const std::vector<int>& keep);

/// Dimensions of the axes in `keep`.
std::vector<int> select_dims(const std::vector<int>& dims,
                             const std::vector<int>& keep);

}  // namespace mnar
