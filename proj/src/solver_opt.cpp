#include "graphtt/solver_opt.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace graphtt {

std::vector<double> beta_schedule(double beta0, const TTFormat& init_tt) {
  if (beta0 < 0.0) throw std::invalid_argument("beta_schedule: beta0 must be nonnegative");
  std::vector<double> betas(init_tt.cores.size());
  for (std::size_t d = 0; d < init_tt.cores.size(); ++d) {
    const double trace = init_tt.cores[d].data.squaredNorm();
    betas[d] = (trace > 0.0) ? beta0 / trace : beta0;
  }
  return betas;
}

double opt_objective(const TTFormat& tt, const DenseTensor& y, const ObservationMask& o,
                     const std::vector<double>& betas,
                     const std::vector<GraphLaplacian>& laplacians) {
  if (y.shape() != o.shape() || y.shape() != tt.shape())
    throw std::invalid_argument("opt_objective: shape mismatch");
  if (betas.size() != tt.cores.size())
    throw std::invalid_argument("opt_objective: betas arity mismatch");

  const DenseTensor recon = tt_reconstruct(tt);
  double data = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    if (o.observed(i)) {
      const double e = y.values()[i] - recon.values()[i];
      data += e * e;
    }

  double reg = 0.0;
  for (std::size_t d = 0; d < tt.cores.size(); ++d) {
    if (betas[d] == 0.0) continue;
    const Eigen::MatrixXd g3 = tt.cores[d].unfold3();
    const Eigen::MatrixXd l = (d < laplacians.size() && laplacians[d].n > 0)
                                  ? laplacians[d].dense()
                                  : Eigen::MatrixXd::Identity(g3.rows(), g3.rows());
    reg += betas[d] * (g3.cwiseProduct(l * g3)).sum();
  }
  return data + reg;
}

OptSolver::OptSolver(const DenseTensor& y, const ObservationMask& o, OptConfig config)
    : OptSolver(y, o, config,
                init_fill_ttsvd(y, o, config.ranks, config.seed)) {}

OptSolver::OptSolver(const DenseTensor& y, const ObservationMask& o, OptConfig config,
                     TTFormat init)
    : y_(y), o_(o), config_(std::move(config)), tt_(std::move(init)) {
  if (y_.shape() != o_.shape()) throw std::invalid_argument("OptSolver: mask shape mismatch");
  tt_.validate();
  if (tt_.shape() != y_.shape()) throw std::invalid_argument("OptSolver: TT shape mismatch");
  if (o_.observed_count() < 1) throw std::invalid_argument("OptSolver: no observed entries");
  if (config_.rel_change_tol <= 0.0) throw std::invalid_argument("OptSolver: tol must be > 0");

  const Shape shape = y_.shape();
  if (config_.laplacians.empty()) {
    config_.laplacians.reserve(shape.size());
    for (Index jd : shape) config_.laplacians.push_back(GraphLaplacian::identity(jd));
  }
  if (config_.laplacians.size() != shape.size())
    throw std::invalid_argument("OptSolver: laplacians arity mismatch");
  for (std::size_t d = 0; d < shape.size(); ++d)
    if (config_.laplacians[d].n != shape[d])
      throw std::invalid_argument("OptSolver: laplacian size mismatch");

  betas_ = beta_schedule(config_.beta0, tt_);
  obs_ = build_mode_observations(y_, o_);
}

void OptSolver::set_betas(std::vector<double> betas) {
  if (betas.size() != y_.shape().size())
    throw std::invalid_argument("set_betas: one beta per mode required");
  betas_ = std::move(betas);
}

const GraphLaplacian& OptSolver::laplacian(Index d) const {
  return config_.laplacians[static_cast<std::size_t>(d)];
}

void OptSolver::prepare_mode(Index d) {
  if (d < 0 || d >= tt_.order()) throw std::out_of_range("prepare_mode: mode out of range");
  const SubchainPair sc = subchains(tt_, d);
  const TTCore& core = tt_.cores[static_cast<std::size_t>(d)];
  const Index p_total = core.r0 * core.r1;
  const ModeObs& m = obs_[static_cast<std::size_t>(d)];
  const Index nobs = static_cast<Index>(m.row.size());

  g3_ = core.unfold3();
  kobs_.resize(p_total, nobs);
  residual_.resize(nobs);
  for (Index i = 0; i < nobs; ++i) {
    Eigen::Map<Eigen::MatrixXd>(kobs_.col(i).data(), core.r0, core.r1) =
        sc.left.col(m.col_left[static_cast<std::size_t>(i)]) *
        sc.right.col(m.col_right[static_cast<std::size_t>(i)]).transpose();
    residual_[i] = m.y[static_cast<std::size_t>(i)] -
                   g3_.row(m.row[static_cast<std::size_t>(i)]).dot(kobs_.col(i));
  }
  active_mode_ = d;
}

void OptSolver::solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                          Eigen::VectorXd& out) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  bool ok = (ldlt.info() == Eigen::Success);
  if (ok) {
    out = ldlt.solve(rhs);
    const double denom = rhs.norm() + 1.0;
    ok = out.allFinite() && (a * out - rhs).norm() <= 1e-8 * denom;
  }
  if (!ok)  // indefinite or singular system: minimum-norm solution
    out = a.completeOrthogonalDecomposition().solve(rhs);
}

bool OptSolver::update_fiber(Index d, Index p) {
  if (active_mode_ != d) throw std::logic_error("update_fiber: prepare_mode(d) required");
  const TTCore& core = tt_.cores[static_cast<std::size_t>(d)];
  const Index jd = core.n, p_total = core.r0 * core.r1;
  if (p < 0 || p >= p_total) throw std::out_of_range("update_fiber: fiber index out of range");
  const ModeObs& m = obs_[static_cast<std::size_t>(d)];
  const Index nobs = static_cast<Index>(m.row.size());
  const double beta = betas_[static_cast<std::size_t>(d)];
  const GraphLaplacian& l = laplacian(d);

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(jd);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(jd);
  const Eigen::VectorXd g_old = g3_.col(p);
  for (Index i = 0; i < nobs; ++i) {
    const Index j = m.row[static_cast<std::size_t>(i)];
    const double c = kobs_(p, i);
    diag[j] += c * c;
    mu[j] += c * (residual_[i] + g_old[j] * c);
  }

  // Documented singular case: no regularizer mass on an unobserved row.
  for (Index j = 0; j < jd; ++j)
    if (diag[j] + beta * l.matrix(j, j) == 0.0) {
      ++singular_fiber_skips_;
      return false;
    }

  Eigen::MatrixXd upsilon = beta > 0.0 ? Eigen::MatrixXd(beta * l.dense())
                                       : Eigen::MatrixXd(Eigen::MatrixXd::Zero(jd, jd));
  upsilon.diagonal() += diag;
  max_system_dim_ = std::max(max_system_dim_, jd);

  Eigen::VectorXd g_new;
  solve_spd(upsilon, mu, g_new);

  const Eigen::VectorXd delta = g_new - g_old;
  for (Index i = 0; i < nobs; ++i)
    residual_[i] -= delta[m.row[static_cast<std::size_t>(i)]] * kobs_(p, i);
  g3_.col(p) = g_new;
  TTCore& mut = tt_.cores[static_cast<std::size_t>(d)];
  for (Index j = 0; j < jd; ++j) mut.data[j * p_total + p] = g_new[j];
  return true;
}

void OptSolver::update_core(Index d) {
  if (active_mode_ != d) throw std::logic_error("update_core: prepare_mode(d) required");
  TTCore& core = tt_.cores[static_cast<std::size_t>(d)];
  const Index jd = core.n, p_total = core.r0 * core.r1;
  const Index n = jd * p_total;
  if (n > config_.core_system_cap)
    throw std::runtime_error("update_core: joint system dimension " + std::to_string(n) + " (" +
                             std::to_string(jd) + "*" + std::to_string(core.r0) + "*" +
                             std::to_string(core.r1) + ") exceeds cap " +
                             std::to_string(config_.core_system_cap));
  const ModeObs& m = obs_[static_cast<std::size_t>(d)];
  const Index nobs = static_cast<Index>(m.row.size());
  const double beta = betas_[static_cast<std::size_t>(d)];

  // Unknown ordering: index (p, j) -> p * J_d + j.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < nobs; ++i) {
    const Index j = m.row[static_cast<std::size_t>(i)];
    const auto c = kobs_.col(i);
    for (Index p = 0; p < p_total; ++p) {
      for (Index q = 0; q < p_total; ++q) a(p * jd + j, q * jd + j) += c[p] * c[q];
      rhs[p * jd + j] += c[p] * m.y[static_cast<std::size_t>(i)];
    }
  }
  if (beta > 0.0) {
    const Eigen::MatrixXd& l = laplacian(d).dense();
    for (Index p = 0; p < p_total; ++p) a.block(p * jd, p * jd, jd, jd) += beta * l;
  }
  max_system_dim_ = std::max(max_system_dim_, n);

  Eigen::VectorXd x;
  solve_spd(a, rhs, x);
  for (Index p = 0; p < p_total; ++p) g3_.col(p) = x.segment(p * jd, jd);
  core.set_unfold3(g3_);
  for (Index i = 0; i < nobs; ++i)
    residual_[i] = m.y[static_cast<std::size_t>(i)] -
                   g3_.row(m.row[static_cast<std::size_t>(i)]).dot(kobs_.col(i));
}

void OptSolver::update_slice_baseline(Index d, Index j) {
  if (active_mode_ != d) throw std::logic_error("update_slice_baseline: prepare_mode(d) required");
  TTCore& core = tt_.cores[static_cast<std::size_t>(d)];
  const Index jd = core.n, p_total = core.r0 * core.r1;
  if (j < 0 || j >= jd) throw std::out_of_range("update_slice_baseline: slice out of range");
  const ModeObs& m = obs_[static_cast<std::size_t>(d)];
  const Index nobs = static_cast<Index>(m.row.size());

  std::vector<Index> hits;
  for (Index i = 0; i < nobs; ++i)
    if (m.row[static_cast<std::size_t>(i)] == j) hits.push_back(i);
  if (hits.empty()) return;  // nothing constrains this slice

  Eigen::MatrixXd design(static_cast<Index>(hits.size()), p_total);
  Eigen::VectorXd target(static_cast<Index>(hits.size()));
  for (std::size_t r = 0; r < hits.size(); ++r) {
    design.row(static_cast<Index>(r)) = kobs_.col(hits[r]).transpose();
    target[static_cast<Index>(r)] = m.y[static_cast<std::size_t>(hits[r])];
  }
  // Minimum-norm least squares (Moore-Penrose).
  const Eigen::VectorXd g = design.completeOrthogonalDecomposition().solve(target);
  max_system_dim_ = std::max(max_system_dim_, p_total);

  g3_.row(j) = g.transpose();
  for (Index p = 0; p < p_total; ++p) core.data[j * p_total + p] = g[p];
  for (Index i : hits)
    residual_[i] = m.y[static_cast<std::size_t>(i)] - g.dot(kobs_.col(i));
}

void OptSolver::sweep() {
  for (Index d = 0; d < tt_.order(); ++d) {
    prepare_mode(d);
    const TTCore& core = tt_.cores[static_cast<std::size_t>(d)];
    switch (config_.update) {
      case UpdateKind::Fiber:
        for (Index p = 0; p < core.r0 * core.r1; ++p) update_fiber(d, p);
        break;
      case UpdateKind::Core:
        update_core(d);
        break;
      case UpdateKind::Slice:
        for (Index j = 0; j < core.n; ++j) update_slice_baseline(d, j);
        break;
    }
  }
}

double OptSolver::current_objective() const {
  if (active_mode_ < 0) return opt_objective(tt_, y_, o_, betas_, config_.laplacians);
  double reg = 0.0;
  for (std::size_t d = 0; d < tt_.cores.size(); ++d) {
    if (betas_[d] == 0.0) continue;
    const Eigen::MatrixXd g3 = tt_.cores[d].unfold3();
    reg += betas_[d] * (g3.cwiseProduct(laplacian(static_cast<Index>(d)).dense() * g3)).sum();
  }
  return residual_.squaredNorm() + reg;
}

OptResult OptSolver::run() {
  OptResult res;
  res.betas = betas_;
  double prev = opt_objective(tt_, y_, o_, betas_, config_.laplacians);
  res.objective_trace.push_back(prev);
  for (Index s = 0; s < config_.max_sweeps; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    sweep();
    const double obj = current_objective();
    const auto t1 = std::chrono::steady_clock::now();
    res.objective_trace.push_back(obj);
    res.sweep_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    res.sweeps = s + 1;
    if (config_.on_sweep) config_.on_sweep(s + 1, tt_);
    const double rel = std::abs(prev - obj) / std::max(std::abs(prev), 1e-30);
    prev = obj;
    if (rel < config_.rel_change_tol) break;
  }
  res.tt = tt_;
  res.singular_fiber_skips = singular_fiber_skips_;
  res.max_system_dim = max_system_dim_;
  return res;
}

OptResult run_graphtt_opt(const DenseTensor& y, const ObservationMask& o,
                          const OptConfig& config) {
  OptSolver solver(y, o, config);
  return solver.run();
}

}  // namespace graphtt
