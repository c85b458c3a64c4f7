#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace graphtt {

using Index = std::int64_t;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

/// Dense D-way tensor. Values are stored in a flat array with the FIRST
/// index varying fastest; this layout is also the on-disk contract of the
/// GTT1 file format.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(Shape shape)
      : shape_(std::move(shape)), values_(Eigen::VectorXd::Zero(checked_size(shape_))) {}

  DenseTensor(Shape shape, Eigen::VectorXd values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != checked_size(shape_))
      throw std::invalid_argument("DenseTensor: value count does not match shape");
  }

  Index order() const { return static_cast<Index>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  Index dim(Index d) const { return shape_.at(static_cast<std::size_t>(d)); }
  Index size() const { return values_.size(); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  Index linear_index(const std::vector<Index>& idx) const {
    if (static_cast<Index>(idx.size()) != order())
      throw std::invalid_argument("DenseTensor: index arity mismatch");
    Index lin = 0, stride = 1;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
      if (idx[d] < 0 || idx[d] >= shape_[d]) throw std::out_of_range("DenseTensor: index out of range");
      lin += idx[d] * stride;
      stride *= shape_[d];
    }
    return lin;
  }

  double at(const std::vector<Index>& idx) const { return values_[linear_index(idx)]; }
  double& at(const std::vector<Index>& idx) { return values_[linear_index(idx)]; }

  double operator[](Index lin) const { return values_[lin]; }
  double& operator[](Index lin) { return values_[lin]; }

  double frobenius_norm() const { return values_.norm(); }

 private:
  static Index checked_size(const Shape& shape) {
    if (shape.empty()) throw std::invalid_argument("DenseTensor: empty shape");
    for (Index d : shape)
      if (d < 1) throw std::invalid_argument("DenseTensor: all dimensions must be >= 1");
    return shape_size(shape);
  }

  Shape shape_;
  Eigen::VectorXd values_;
};

/// Mode-d matricization (0-based mode). Rows index j_d; columns run over the
/// remaining indices with j_0 varying fastest and j_d skipped.
Eigen::MatrixXd matricize(const DenseTensor& t, Index mode);

/// Exact inverse of matricize.
DenseTensor tensorize(const Eigen::MatrixXd& m, Index mode, const Shape& shape);

/// Column index of entry `idx` in the mode-d matricization.
Index matricize_col(const Shape& shape, Index mode, const std::vector<Index>& idx);

/// Increments a multi-index odometer-style (first index fastest).
/// Returns false once the index wraps around to all zeros.
bool next_multi_index(std::vector<Index>& idx, const Shape& shape);

}  // namespace graphtt
