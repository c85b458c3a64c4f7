#pragma once

#include <Eigen/Core>

#include "graphtt/tensor.hpp"

namespace graphtt {

/// Per-mode graph Laplacian L = D - A. The identity flavor (no graph
/// information, pure power regularization) is tracked explicitly so solvers
/// can special-case it.
struct GraphLaplacian {
  Index n = 0;
  bool is_identity = false;
  Eigen::MatrixXd matrix;  // n x n; for identity kind this is I_n

  static GraphLaplacian identity(Index n);

  const Eigen::MatrixXd& dense() const { return matrix; }
  double quadratic_form(const Eigen::VectorXd& x) const;
};

struct WeightSpec {
  enum class Kind { ExpDecay, Identity };
  Kind kind = Kind::ExpDecay;
  double alpha = 1.0;  // exp(-alpha * |j-k|^2)
  Index n = 0;
};

/// Distance-decaying weights A_jk = exp(-alpha (j-k)^2), zero diagonal.
/// Entries below 1e-12 are truncated to zero.
Eigen::MatrixXd build_weights(const WeightSpec& spec);

/// L = diag(row sums) - A. Rejects asymmetric, negative, or
/// nonzero-diagonal input.
GraphLaplacian laplacian_from_weights(const Eigen::MatrixXd& a);

/// Laplacian for a weight spec (identity kind maps to the identity matrix).
GraphLaplacian laplacian_from_spec(const WeightSpec& spec);

}  // namespace graphtt
