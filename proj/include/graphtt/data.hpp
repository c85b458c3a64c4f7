#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "graphtt/tensor.hpp"
#include "graphtt/tt.hpp"

namespace graphtt {

/// Boolean observation indicator plus the observed-entry count.
class ObservationMask {
 public:
  ObservationMask() = default;
  explicit ObservationMask(Shape shape, bool observed = true)
      : shape_(std::move(shape)),
        flags_(static_cast<std::size_t>(shape_size(shape_)), observed ? 1 : 0) {
    recount();
  }

  const Shape& shape() const { return shape_; }
  Index size() const { return static_cast<Index>(flags_.size()); }
  bool observed(Index lin) const { return flags_[static_cast<std::size_t>(lin)] != 0; }
  void set(Index lin, bool v) { flags_[static_cast<std::size_t>(lin)] = v ? 1 : 0; }
  void recount();
  Index observed_count() const { return observed_count_; }

  /// Logical AND with another mask of identical shape.
  ObservationMask operator&(const ObservationMask& other) const;

  /// 0/1 tensor view (used for file round-trips).
  DenseTensor to_tensor() const;
  static ObservationMask from_tensor(const DenseTensor& t);

 private:
  Shape shape_;
  std::vector<std::uint8_t> flags_;
  Index observed_count_ = 0;
};

/// Derives an independent RNG stream for (master seed, stream index).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Entries observed i.i.d. with probability 1 - missing_rate.
ObservationMask random_mask(const Shape& shape, double missing_rate, std::uint64_t seed);

/// Removes floor(fraction * J_mode) whole mode-`mode` hyperslabs uniformly at
/// random.
ObservationMask slice_mask(const Shape& shape, Index mode, double fraction, std::uint64_t seed);

/// Broadcasts a 2-D boolean stencil (matching the first two modes) across the
/// remaining modes.
ObservationMask stencil_mask(const Shape& shape, const std::vector<std::uint8_t>& stencil,
                             Index stencil_rows, Index stencil_cols);

/// Additive i.i.d. N(0, sigma2) noise.
DenseTensor add_noise(const DenseTensor& x, double sigma2, std::uint64_t seed);

/// Noise variance achieving the requested SNR (dB): ||X||_F^2 / (N * 10^(snr/10)).
double snr_to_sigma2(const DenseTensor& x, double snr_db);

struct SyntheticSpec {
  Shape shape;
  std::vector<Index> ranks;  // D+1, boundaries 1
  /// Fiber covariance exponent: Sigma_ij = exp(-|i-j|^2 / cov_scale).
  double cov_scale = 5.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  DenseTensor truth;
  TTFormat cores;
};

/// Draws each TT core's mode-3 unfolded columns (the core fibers) i.i.d. from
/// N(0, Sigma) with the distance-decay covariance above.
SyntheticData gen_synthetic_tt(const SyntheticSpec& spec);

/// Gaussian-fills the unobserved entries with the observed entries' mean and
/// variance, then runs tt_svd at the given ranks.
TTFormat init_fill_ttsvd(const DenseTensor& y, const ObservationMask& o,
                         const std::vector<Index>& ranks, std::uint64_t seed);

/// Observed entries of one mode-d matricization: matricization row j_d, the
/// left/right subchain column indices the entry selects, and the value.
struct ModeObs {
  std::vector<Index> row, col_left, col_right;
  std::vector<double> y;
};

/// One ModeObs per mode (shared plumbing for the alternating solvers).
std::vector<ModeObs> build_mode_observations(const DenseTensor& y, const ObservationMask& o);

}  // namespace graphtt
