#include "graphtt/tensor.hpp"

namespace graphtt {

bool next_multi_index(std::vector<Index>& idx, const Shape& shape) {
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (++idx[d] < shape[d]) return true;
    idx[d] = 0;
  }
  return false;
}

Index matricize_col(const Shape& shape, Index mode, const std::vector<Index>& idx) {
  Index col = 0, stride = 1;
  for (Index d = 0; d < static_cast<Index>(shape.size()); ++d) {
    if (d == mode) continue;
    col += idx[static_cast<std::size_t>(d)] * stride;
    stride *= shape[static_cast<std::size_t>(d)];
  }
  return col;
}

Eigen::MatrixXd matricize(const DenseTensor& t, Index mode) {
  const Shape& shape = t.shape();
  if (mode < 0 || mode >= t.order()) throw std::out_of_range("matricize: mode out of range");
  const Index rows = shape[static_cast<std::size_t>(mode)];
  const Index cols = t.size() / rows;
  Eigen::MatrixXd m(rows, cols);

  std::vector<Index> idx(shape.size(), 0);
  Index lin = 0;
  do {
    m(idx[static_cast<std::size_t>(mode)], matricize_col(shape, mode, idx)) = t[lin++];
  } while (next_multi_index(idx, shape));
  return m;
}

DenseTensor tensorize(const Eigen::MatrixXd& m, Index mode, const Shape& shape) {
  const Index order = static_cast<Index>(shape.size());
  if (mode < 0 || mode >= order) throw std::out_of_range("tensorize: mode out of range");
  const Index rows = shape[static_cast<std::size_t>(mode)];
  if (m.rows() != rows || m.cols() != shape_size(shape) / rows)
    throw std::invalid_argument("tensorize: matrix dimensions do not match shape");

  DenseTensor t(shape);
  std::vector<Index> idx(shape.size(), 0);
  Index lin = 0;
  do {
    t[lin++] = m(idx[static_cast<std::size_t>(mode)], matricize_col(shape, mode, idx));
  } while (next_multi_index(idx, shape));
  return t;
}

}  // namespace graphtt
