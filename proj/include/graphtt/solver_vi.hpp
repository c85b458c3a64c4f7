#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "graphtt/data.hpp"
#include "graphtt/graph.hpp"
#include "graphtt/tensor.hpp"
#include "graphtt/tt.hpp"

namespace graphtt {

/// log K_nu(x), the modified Bessel function of the second kind, stable for
/// |nu| up to ~1e5 and x in 1e-8..1e8. K_{-nu} = K_nu.
double log_bessel_k(double order, double x);

/// Moments of GIG(lambda_hat, a_hat, b_hat):
///   E[z]   = sqrt(b/a) * K_{l+1}(s)/K_l(s),          s = sqrt(a*b)
///   E[1/z] = sqrt(a/b) * K_{l+1}(s)/K_l(s) - 2l/b
/// computed in log space.
struct GIGMoments {
  double mean_z;
  double mean_inv_z;
};
GIGMoments gig_moments(double a_hat, double b_hat, double lambda_hat);

struct VIConfig {
  std::vector<Index> init_ranks;  // D+1 entries, boundaries 1
  double gig_lambda = -0.5;
  double gig_b = 1e-6;
  double gamma_c = 1e-6;
  double gamma_f = 1e-6;
  double tau_alpha = 1e-6;
  double tau_beta = 1e-6;
  double prune_threshold = 1e-7;
  // Diagonal ridge (relative to the mean Laplacian diagonal) added to each
  // graph Laplacian; makes the scale prior proper along the graph null space
  // so dead slices shrink on both sides. Set to 0 to use the Laplacians as-is.
  double laplacian_ridge = 1e-6;
  /// Per-mode Laplacians; empty means identity per mode.
  std::vector<GraphLaplacian> laplacians;
  // Fiber-update passes per outer iteration. Extra passes let the fiber means
  // settle between scale updates, which helps the sparsity mechanism merge
  // redundant directions instead of locking onto an inflated-rank optimum.
  Index fiber_sweeps_per_iter = 1;
  Index max_iters = 100;
  double rel_change_tol = 1e-5;
  std::uint64_t seed = 0;
  /// false (default): both neighbor-core sums in the z update carry 1/2;
  /// true: the second sum carries a full factor 1 instead.
  bool asymmetric_z_sums = false;
  /// Optional per-iteration observer.
  std::function<void(Index iter, const TTFormat& mean)> on_iter;
};

struct GIGPosterior {
  double a_hat = 1.0;
  double b_hat = 1.0;
  double lambda_hat = 0.0;
};

struct NoisePosterior {
  double alpha_hat = 1.0;
  double beta_hat = 1.0;
};

struct VIResult {
  TTFormat mean;
  std::vector<Index> ranks;
  double e_tau = 1.0;
  std::vector<double> recon_change_trace;
  std::vector<double> iter_seconds;
  Index iters = 0;
  std::vector<std::vector<Index>> rank_history;
};

/// Mean-field coordinate-ascent solver. Fiber posteriors are Gaussian, the
/// per-slice scale variables z are GIG, their rates a are Gamma, and the
/// noise precision tau is Gamma; updates cycle fibers -> a -> z -> tau ->
/// rank pruning.
class VISolver {
 public:
  VISolver(const DenseTensor& y, const ObservationMask& o, VIConfig config);

  Index order() const { return static_cast<Index>(shape_.size()); }
  const std::vector<Index>& ranks() const { return ranks_; }
  double e_tau() const { return e_tau_; }
  const NoisePosterior& noise_posterior() const { return tau_; }

  /// Posterior mean as a TT (built from the fiber means).
  TTFormat mean_tt() const;

  Eigen::VectorXd fiber_mean(Index d, Index p) const;
  const Eigen::MatrixXd& fiber_cov(Index d, Index p) const;

  /// E[G_{:,:,j} (x) G_{:,:,j}] for core d: the mean Kronecker square plus
  /// the sparse variance correction.
  Eigen::MatrixXd expected_slice_kron(Index d, Index j) const;

  /// E[(right (x) left)(right (x) left)^T] for mode d at the given subchain
  /// column pair, assembled from the chained expected Kronecker slices.
  Eigen::MatrixXd expected_subchain_second_moment(Index d, Index col_left, Index col_right) const;

  // One coordinate-ascent block each; exposed for the fine-grained tests.
  void update_mode_fibers(Index d);
  void update_a(Index boundary);
  void update_z(Index boundary);
  void update_tau();
  void prune();

  VIResult run();

  // Test hooks for the degeneracy checks against the optimization solver.
  void zero_covariances();
  void set_z_moments(Index boundary, const Eigen::VectorXd& mean_z,
                     const Eigen::VectorXd& mean_inv_z);
  void set_tau_moment(double e_tau);

  const Eigen::VectorXd& z_mean(Index boundary) const;
  const Eigen::VectorXd& z_mean_inv(Index boundary) const;
  const std::vector<GIGPosterior>& z_posterior(Index boundary) const;

 private:
  struct ModeTables {
    Eigen::MatrixXd mean_left, mean_right;  // S_d x nl, S_{d+1} x nr
    Eigen::MatrixXd sq_left, sq_right;      // S_d^2 x nl, S_{d+1}^2 x nr
  };
  ModeTables build_tables(Index d) const;
  Eigen::MatrixXd chain_sq_left(Index upto) const;   // S_upto^2 x prod_{t<upto} J_t
  Eigen::MatrixXd chain_sq_right(Index from) const;  // S_{from}^2 x prod_{t>=from} J_t
  double fiber_quad(Index d, Index p) const;         // nu^T L nu + tr(L Sigma)
  double lambda_hat(Index boundary) const;
  const GraphLaplacian& laplacian(Index d) const;
  void check_boundary(Index b) const;

  Shape shape_;
  std::vector<Index> ranks_;  // current S_d, D+1 entries
  VIConfig config_;
  std::vector<ModeObs> obs_;
  Index observed_count_ = 0;
  double y_sq_sum_ = 0.0;  // sum of observed y^2

  // Fiber posteriors: means as P x J_d matrices (column j contiguous),
  // per-fiber covariances, and the covariance diagonals (P x J_d).
  std::vector<Eigen::MatrixXd> numat_;
  std::vector<std::vector<Eigen::MatrixXd>> sigmas_;
  std::vector<Eigen::MatrixXd> svar_;

  // Boundary-indexed scale posteriors (boundaries 0 and D are fixed at 1).
  std::vector<Eigen::VectorXd> e_z_, e_inv_z_;
  std::vector<std::vector<GIGPosterior>> z_post_;
  std::vector<Eigen::VectorXd> c_hat_, f_hat_;

  NoisePosterior tau_;
  double e_tau_ = 1.0;
  Index clamped_c_warnings_ = 0;
};

VIResult run_graphtt_vi(const DenseTensor& y, const ObservationMask& o, const VIConfig& config);

}  // namespace graphtt
