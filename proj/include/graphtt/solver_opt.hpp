#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graphtt/data.hpp"
#include "graphtt/graph.hpp"
#include "graphtt/tensor.hpp"
#include "graphtt/tt.hpp"

namespace graphtt {

/// Which block update the alternating solver performs.
enum class UpdateKind {
  Fiber,  // per-fiber closed form, J_d-dimensional systems
  Core,   // whole-core joint normal equations, J_d*R_d*R_{d+1}-dimensional
  Slice,  // per-frontal-slice pseudo-inverse baseline (no regularizer)
};

struct OptConfig {
  std::vector<Index> ranks;  // D+1 entries, boundaries 1
  double beta0 = 0.0;
  /// Per-mode Laplacians; empty means identity (pure power penalty) per mode.
  std::vector<GraphLaplacian> laplacians;
  Index max_sweeps = 200;
  double rel_change_tol = 1e-6;
  std::uint64_t seed = 0;
  UpdateKind update = UpdateKind::Fiber;
  /// core-update refusal threshold on the joint system dimension.
  Index core_system_cap = 4096;
  /// Optional per-sweep observer (e.g. RSE tracing); called after each sweep.
  std::function<void(Index sweep, const TTFormat&)> on_sweep;
};

struct OptResult {
  TTFormat tt;
  std::vector<double> betas;
  /// objective_trace[0] is the initial objective, then one entry per sweep.
  std::vector<double> objective_trace;
  std::vector<double> sweep_seconds;
  Index sweeps = 0;
  Index singular_fiber_skips = 0;
  /// Largest linear-system dimension actually factorized.
  Index max_system_dim = 0;
};

/// beta_d = beta0 / tr(G3^T G3) of the initial core (beta0 itself for an
/// all-zero core).
std::vector<double> beta_schedule(double beta0, const TTFormat& init_tt);

/// ||O * (Y - reconstruction)||_F^2 + sum_d beta_d tr(G3^T L^(d) G3).
double opt_objective(const TTFormat& tt, const DenseTensor& y, const ObservationMask& o,
                     const std::vector<double>& betas,
                     const std::vector<GraphLaplacian>& laplacians);

/// Expected linear-system sizes (for instrumentation assertions; nothing is
/// materialized).
inline Index fiber_system_dim(const Shape& shape, Index mode) {
  return shape.at(static_cast<std::size_t>(mode));
}
inline Index core_system_dim(const Shape& shape, const std::vector<Index>& ranks, Index mode) {
  const auto d = static_cast<std::size_t>(mode);
  return shape.at(d) * ranks.at(d) * ranks.at(d + 1);
}

/// Alternating solver with explicit per-block entry points (exposed for the
/// fine-grained tests; run_graphtt_opt drives the full loop).
class OptSolver {
 public:
  OptSolver(const DenseTensor& y, const ObservationMask& o, OptConfig config);
  OptSolver(const DenseTensor& y, const ObservationMask& o, OptConfig config, TTFormat init);

  const TTFormat& tt() const { return tt_; }
  const std::vector<double>& betas() const { return betas_; }
  /// Overrides the schedule-derived betas (exposed for the solver-equivalence
  /// tests); must supply one value per mode.
  void set_betas(std::vector<double> betas);
  Index singular_fiber_skips() const { return singular_fiber_skips_; }
  Index max_system_dim() const { return max_system_dim_; }

  /// Rebuilds the observed-entry design rows and residuals for mode d.
  /// Must be called before the per-block updates below and again after any
  /// other mode's cores change.
  void prepare_mode(Index d);

  /// Closed-form fiber update (applies the result). Returns false when the
  /// system is singular (fiber left unchanged, warning counted).
  bool update_fiber(Index d, Index p);

  /// Whole-core joint update. Throws when J_d*R_d*R_{d+1} exceeds the cap.
  void update_core(Index d);

  /// Per-slice pseudo-inverse baseline update for frontal slice j of core d.
  void update_slice_baseline(Index d, Index j);

  /// One full sweep over all modes with the configured update kind.
  void sweep();

  double current_objective() const;

  OptResult run();

 private:
  void solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, Eigen::VectorXd& out);
  const GraphLaplacian& laplacian(Index d) const;

  DenseTensor y_;
  ObservationMask o_;
  OptConfig config_;
  TTFormat tt_;
  std::vector<double> betas_;
  std::vector<ModeObs> obs_;

  // Mode-d working state built by prepare_mode.
  Index active_mode_ = -1;
  Eigen::MatrixXd g3_;        // J_d x P, current core's mode-3 unfolding
  Eigen::MatrixXd kobs_;      // P x nobs, kron rows at observed columns
  Eigen::VectorXd residual_;  // nobs, O * (Y - reconstruction) at observed columns

  Index singular_fiber_skips_ = 0;
  Index max_system_dim_ = 0;
};

OptResult run_graphtt_opt(const DenseTensor& y, const ObservationMask& o, const OptConfig& config);

}  // namespace graphtt
