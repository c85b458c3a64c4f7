#pragma once

#include <vector>

#include <Eigen/Core>

#include "graphtt/tensor.hpp"

namespace graphtt {

/// One 3-way TT core of shape r0 x r1 x n. The flat buffer uses the layout
/// (r0 fastest, then r1, then n), matching the GTTC file format, so frontal
/// slice j is a contiguous r0 x r1 column-major block.
struct TTCore {
  Index r0 = 1;
  Index r1 = 1;
  Index n = 1;
  Eigen::VectorXd data;

  TTCore() = default;
  TTCore(Index r0_, Index r1_, Index n_)
      : r0(r0_), r1(r1_), n(n_), data(Eigen::VectorXd::Zero(r0_ * r1_ * n_)) {}

  Eigen::Map<const Eigen::MatrixXd> slice(Index j) const {
    return {data.data() + j * r0 * r1, r0, r1};
  }
  Eigen::Map<Eigen::MatrixXd> slice(Index j) {
    return {data.data() + j * r0 * r1, r0, r1};
  }

  /// Mode-3 unfolding: n x (r0*r1), column p = r1_index * r0 + r0_index.
  Eigen::MatrixXd unfold3() const;
  void set_unfold3(const Eigen::MatrixXd& g3);
};

struct TTFormat {
  std::vector<TTCore> cores;

  TTFormat() = default;
  /// Zero-initialized TT with the given shape and rank chain (size D+1,
  /// boundary ranks must be 1).
  TTFormat(const Shape& shape, const std::vector<Index>& ranks);

  Index order() const { return static_cast<Index>(cores.size()); }
  Shape shape() const;
  std::vector<Index> ranks() const;
  void validate() const;
};

/// Evaluates one entry: the 1x1 chain product of frontal slices.
double tt_entry(const TTFormat& tt, const std::vector<Index>& idx);

/// Full dense reconstruction.
DenseTensor tt_reconstruct(const TTFormat& tt);

/// Partial chain products around mode d:
///   left:  R_d x (J_0...J_{d-1}),  column order j_0 fastest;
///   right: R_{d+1} x (J_{d+1}...J_{D-1}), column order j_{d+1} fastest.
/// Satisfies matricize(tt_reconstruct(tt), d) == unfold3(core d) * kron(right, left).
struct SubchainPair {
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
};
SubchainPair subchains(const TTFormat& tt, Index mode);

/// kron(right, left) as used in the fiber updates: row p = l*R_d + k maps to
/// right row l and left row k.
Eigen::MatrixXd subchain_kron(const SubchainPair& sc);

/// Sequential truncated-SVD sweep (left to right). max_ranks has D+1 entries
/// with boundaries 1; each interior bound must be >= 1.
TTFormat tt_svd(const DenseTensor& t, const std::vector<Index>& max_ranks);

/// Total element count sum_d J_d * R_d * R_{d+1}.
Index tt_param_count(const Shape& shape, const std::vector<Index>& ranks);

}  // namespace graphtt
