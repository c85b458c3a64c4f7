#include "graphtt/solver_vi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace graphtt {

namespace {

// Uniform (Debye) asymptotic expansion of log K_nu(x) for large nu
// (DLMF 10.41.4 with polynomials u1..u3); relative error ~nu^-4.
double log_bessel_k_debye(double nu, double x) {
  const double z = x / nu;
  const double s = std::sqrt(1.0 + z * z);
  const double eta = s + std::log(z / (1.0 + s));
  const double t = 1.0 / s;
  const double t2 = t * t;
  const double u1 = t * (3.0 - 5.0 * t2) / 24.0;
  const double u2 = t2 * (81.0 - t2 * (462.0 - 385.0 * t2)) / 1152.0;
  const double u3 =
      t * t2 * (30375.0 - t2 * (369603.0 - t2 * (765765.0 - 425425.0 * t2))) / 414720.0;
  const double series = 1.0 - u1 / nu + u2 / (nu * nu) - u3 / (nu * nu * nu);
  return 0.5 * std::log(M_PI / (2.0 * nu)) - nu * eta - 0.25 * std::log1p(z * z) +
         std::log(series);
}

const bool g_gsl_handler_disabled = [] {
  gsl_set_error_handler_off();
  return true;
}();

}  // namespace

double log_bessel_k(double order, double x) {
  if (x <= 0.0) throw std::invalid_argument("log_bessel_k: x must be positive");
  const double nu = std::abs(order);  // K_{-nu} = K_nu
  if (nu > 500.0) return log_bessel_k_debye(nu, x);
  gsl_sf_result res;
  const int status = gsl_sf_bessel_lnKnu_e(nu, x, &res);
  if (status == GSL_SUCCESS) return res.val;
  if (nu > 50.0) return log_bessel_k_debye(nu, x);
  throw std::runtime_error("log_bessel_k: GSL failure at nu=" + std::to_string(nu) +
                           ", x=" + std::to_string(x));
}

GIGMoments gig_moments(double a_hat, double b_hat, double lambda_hat) {
  if (a_hat <= 0.0 || b_hat <= 0.0)
    throw std::invalid_argument("gig_moments: a_hat and b_hat must be positive");
  const double s = std::sqrt(a_hat * b_hat);
  const double log_ratio = log_bessel_k(lambda_hat + 1.0, s) - log_bessel_k(lambda_hat, s);
  const double ratio = std::exp(log_ratio);
  GIGMoments m;
  m.mean_z = std::sqrt(b_hat / a_hat) * ratio;
  m.mean_inv_z = std::sqrt(a_hat / b_hat) * ratio - 2.0 * lambda_hat / b_hat;
  // The moments are finite and positive in exact arithmetic; keep them that
  // way under overflow so degenerate (nearly pruned) slices cannot poison
  // later updates with inf/NaN.
  auto clamp_positive = [](double v) {
    if (!std::isfinite(v) || v > 1e290) return 1e290;
    return std::max(v, 1e-290);
  };
  m.mean_z = clamp_positive(m.mean_z);
  m.mean_inv_z = clamp_positive(m.mean_inv_z);
  return m;
}

VISolver::VISolver(const DenseTensor& y, const ObservationMask& o, VIConfig config)
    : shape_(y.shape()), config_(std::move(config)) {
  if (y.shape() != o.shape()) throw std::invalid_argument("VISolver: mask shape mismatch");
  if (config_.init_ranks.size() != shape_.size() + 1)
    throw std::invalid_argument("VISolver: init_ranks must have D+1 entries");
  if (config_.init_ranks.front() != 1 || config_.init_ranks.back() != 1)
    throw std::invalid_argument("VISolver: boundary ranks must be 1");
  if (config_.prune_threshold < 0.0)
    throw std::invalid_argument("VISolver: prune_threshold must be nonnegative");
  if (config_.gig_b <= 0.0 || config_.gamma_c <= 0.0 || config_.gamma_f <= 0.0 ||
      config_.tau_alpha <= 0.0 || config_.tau_beta <= 0.0)
    throw std::invalid_argument("VISolver: prior parameters must be positive");
  if (o.observed_count() < 1) throw std::invalid_argument("VISolver: no observed entries");

  if (config_.laplacians.empty()) {
    config_.laplacians.reserve(shape_.size());
    for (Index jd : shape_) config_.laplacians.push_back(GraphLaplacian::identity(jd));
  }
  if (config_.laplacians.size() != shape_.size())
    throw std::invalid_argument("VISolver: laplacians arity mismatch");
  for (std::size_t d = 0; d < shape_.size(); ++d)
    if (config_.laplacians[d].n != shape_[d])
      throw std::invalid_argument("VISolver: laplacian size mismatch");
  // Graph Laplacians have a nontrivial null space (constant fibers), which
  // makes the scale prior improper: a fiber whose data term vanishes is never
  // shrunk along the null direction and the slice can stay half-alive forever.
  // A tiny ridge makes the prior proper so dead slices decay on both sides.
  if (config_.laplacian_ridge > 0.0) {
    for (auto& lap : config_.laplacians) {
      if (lap.is_identity) continue;
      const double scale = lap.matrix.diagonal().mean();
      lap.matrix.diagonal().array() += config_.laplacian_ridge * std::max(scale, 1.0);
    }
  }

  obs_ = build_mode_observations(y, o);
  observed_count_ = o.observed_count();
  for (double v : obs_[0].y) y_sq_sum_ += v * v;

  // Posterior means: Gaussian fill + TT-SVD (the actual ranks may be smaller
  // than requested when a matricization bound binds).
  TTFormat init = init_fill_ttsvd(y, o, config_.init_ranks, config_.seed);
  ranks_ = init.ranks();
  const Index order = static_cast<Index>(shape_.size());
  numat_.resize(static_cast<std::size_t>(order));
  sigmas_.resize(static_cast<std::size_t>(order));
  svar_.resize(static_cast<std::size_t>(order));
  for (Index d = 0; d < order; ++d) {
    const TTCore& c = init.cores[static_cast<std::size_t>(d)];
    const Index p_total = c.r0 * c.r1;
    Eigen::MatrixXd nm(p_total, c.n);
    for (Index j = 0; j < c.n; ++j) nm.col(j) = c.data.segment(j * p_total, p_total);
    numat_[static_cast<std::size_t>(d)] = std::move(nm);
    sigmas_[static_cast<std::size_t>(d)].assign(
        static_cast<std::size_t>(p_total),
        Eigen::MatrixXd(1e-3 * Eigen::MatrixXd::Identity(c.n, c.n)));
    svar_[static_cast<std::size_t>(d)] = Eigen::MatrixXd::Constant(p_total, c.n, 1e-3);
  }

  // Scale posteriors start neutral: E[z] = E[1/z] = 1 on every boundary.
  e_z_.resize(static_cast<std::size_t>(order) + 1);
  e_inv_z_.resize(static_cast<std::size_t>(order) + 1);
  z_post_.resize(static_cast<std::size_t>(order) + 1);
  c_hat_.resize(static_cast<std::size_t>(order) + 1);
  f_hat_.resize(static_cast<std::size_t>(order) + 1);
  for (Index b = 0; b <= order; ++b) {
    const Index s = ranks_[static_cast<std::size_t>(b)];
    e_z_[static_cast<std::size_t>(b)] = Eigen::VectorXd::Ones(s);
    e_inv_z_[static_cast<std::size_t>(b)] = Eigen::VectorXd::Ones(s);
    z_post_[static_cast<std::size_t>(b)].assign(static_cast<std::size_t>(s), GIGPosterior{});
    c_hat_[static_cast<std::size_t>(b)] = Eigen::VectorXd::Constant(s, config_.gamma_c);
    f_hat_[static_cast<std::size_t>(b)] = Eigen::VectorXd::Constant(s, config_.gamma_f);
  }

  tau_ = NoisePosterior{config_.tau_alpha, config_.tau_beta};
  e_tau_ = config_.tau_alpha / config_.tau_beta;
}

const GraphLaplacian& VISolver::laplacian(Index d) const {
  return config_.laplacians[static_cast<std::size_t>(d)];
}

void VISolver::check_boundary(Index b) const {
  if (b < 1 || b >= order()) throw std::out_of_range("boundary index must be interior (1..D-1)");
}

TTFormat VISolver::mean_tt() const {
  TTFormat tt;
  for (Index d = 0; d < order(); ++d) {
    const Eigen::MatrixXd& nm = numat_[static_cast<std::size_t>(d)];
    TTCore core(ranks_[static_cast<std::size_t>(d)], ranks_[static_cast<std::size_t>(d) + 1],
                nm.cols());
    const Index p_total = core.r0 * core.r1;
    for (Index j = 0; j < core.n; ++j) core.data.segment(j * p_total, p_total) = nm.col(j);
    tt.cores.push_back(std::move(core));
  }
  return tt;
}

Eigen::VectorXd VISolver::fiber_mean(Index d, Index p) const {
  return numat_[static_cast<std::size_t>(d)].row(p).transpose();
}

const Eigen::MatrixXd& VISolver::fiber_cov(Index d, Index p) const {
  return sigmas_[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)];
}

Eigen::MatrixXd VISolver::expected_slice_kron(Index d, Index j) const {
  const Index s0 = ranks_[static_cast<std::size_t>(d)];
  const Index s1 = ranks_[static_cast<std::size_t>(d) + 1];
  Eigen::Map<const Eigen::MatrixXd> n(numat_[static_cast<std::size_t>(d)].col(j).data(), s0, s1);
  Eigen::MatrixXd m(s0 * s0, s1 * s1);
  for (Index l1 = 0; l1 < s1; ++l1)
    for (Index l2 = 0; l2 < s1; ++l2)
      for (Index k1 = 0; k1 < s0; ++k1)
        for (Index k2 = 0; k2 < s0; ++k2)
          m(k1 * s0 + k2, l1 * s1 + l2) = n(k1, l1) * n(k2, l2);
  for (Index p = 0; p < s0 * s1; ++p) {
    const Index k = p % s0, l = p / s0;
    m(k * s0 + k, l * s1 + l) += svar_[static_cast<std::size_t>(d)](p, j);
  }
  return m;
}

Eigen::MatrixXd VISolver::chain_sq_left(Index upto) const {
  Eigen::MatrixXd table = Eigen::MatrixXd::Ones(1, 1);
  for (Index t = 0; t < upto; ++t) {
    const Index s0 = ranks_[static_cast<std::size_t>(t)];
    const Index s1 = ranks_[static_cast<std::size_t>(t) + 1];
    const Index jt = shape_[static_cast<std::size_t>(t)];
    const Index prev = table.cols();
    const Eigen::MatrixXd& nm = numat_[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd& sv = svar_[static_cast<std::size_t>(t)];
    Eigen::MatrixXd next(s1 * s1, prev * jt);
    for (Index j = 0; j < jt; ++j) {
      Eigen::Map<const Eigen::MatrixXd> n(nm.col(j).data(), s0, s1);
      for (Index c = 0; c < prev; ++c) {
        Eigen::Map<const Eigen::MatrixXd> x(table.col(c).data(), s0, s0);
        Eigen::Map<Eigen::MatrixXd> out(next.col(j * prev + c).data(), s1, s1);
        out.noalias() = n.transpose() * x * n;
        for (Index p = 0; p < s0 * s1; ++p) {
          const Index k = p % s0, l = p / s0;
          out(l, l) += sv(p, j) * x(k, k);
        }
      }
    }
    table = std::move(next);
  }
  return table;
}

Eigen::MatrixXd VISolver::chain_sq_right(Index from) const {
  Eigen::MatrixXd table = Eigen::MatrixXd::Ones(1, 1);
  for (Index t = order() - 1; t >= from; --t) {
    const Index s0 = ranks_[static_cast<std::size_t>(t)];
    const Index s1 = ranks_[static_cast<std::size_t>(t) + 1];
    const Index jt = shape_[static_cast<std::size_t>(t)];
    const Index prev = table.cols();
    const Eigen::MatrixXd& nm = numat_[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd& sv = svar_[static_cast<std::size_t>(t)];
    Eigen::MatrixXd next(s0 * s0, jt * prev);
    for (Index rest = 0; rest < prev; ++rest) {
      Eigen::Map<const Eigen::MatrixXd> x(table.col(rest).data(), s1, s1);
      for (Index j = 0; j < jt; ++j) {
        Eigen::Map<const Eigen::MatrixXd> n(nm.col(j).data(), s0, s1);
        Eigen::Map<Eigen::MatrixXd> out(next.col(rest * jt + j).data(), s0, s0);
        out.noalias() = n * x * n.transpose();
        for (Index p = 0; p < s0 * s1; ++p) {
          const Index k = p % s0, l = p / s0;
          out(k, k) += sv(p, j) * x(l, l);
        }
      }
    }
    table = std::move(next);
  }
  return table;
}

VISolver::ModeTables VISolver::build_tables(Index d) const {
  ModeTables t;
  const SubchainPair sc = subchains(mean_tt(), d);
  t.mean_left = sc.left;
  t.mean_right = sc.right;
  t.sq_left = chain_sq_left(d);
  t.sq_right = chain_sq_right(d + 1);
  return t;
}

Eigen::MatrixXd VISolver::expected_subchain_second_moment(Index d, Index col_left,
                                                          Index col_right) const {
  const Index s0 = ranks_[static_cast<std::size_t>(d)];
  const Index s1 = ranks_[static_cast<std::size_t>(d) + 1];
  const Eigen::MatrixXd left = chain_sq_left(d);
  const Eigen::MatrixXd right = chain_sq_right(d + 1);
  Eigen::Map<const Eigen::MatrixXd> a(left.col(col_left).data(), s0, s0);
  Eigen::Map<const Eigen::MatrixXd> b(right.col(col_right).data(), s1, s1);
  // E[K_p K_q] with p = l*S_d + k, q = n*S_d + m equals A(k,m) * B(l,n),
  // i.e. kron(B, A).
  Eigen::MatrixXd m(s0 * s1, s0 * s1);
  for (Index l = 0; l < s1; ++l)
    for (Index n = 0; n < s1; ++n) m.block(l * s0, n * s0, s0, s0) = b(l, n) * a;
  return m;
}

void VISolver::update_mode_fibers(Index d) {
  if (d < 0 || d >= order()) throw std::out_of_range("update_mode_fibers: mode out of range");
  const ModeTables tables = build_tables(d);
  const Index s0 = ranks_[static_cast<std::size_t>(d)];
  const Index s1 = ranks_[static_cast<std::size_t>(d) + 1];
  const Index p_total = s0 * s1;
  const Index jd = shape_[static_cast<std::size_t>(d)];
  const ModeObs& m = obs_[static_cast<std::size_t>(d)];
  const Index nobs = static_cast<Index>(m.row.size());
  const Eigen::MatrixXd& l = laplacian(d).dense();
  Eigen::MatrixXd& nm = numat_[static_cast<std::size_t>(d)];
  Eigen::MatrixXd& sv = svar_[static_cast<std::size_t>(d)];

  Eigen::VectorXd brow(s1), w(s0);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(jd, jd);
  for (Index p = 0; p < p_total; ++p) {
    const Index k = p % s0, lidx = p / s0;
    const double zfac = e_inv_z_[static_cast<std::size_t>(d)][k] *
                        e_inv_z_[static_cast<std::size_t>(d) + 1][lidx];

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(jd);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(jd);
    for (Index i = 0; i < nobs; ++i) {
      const Index j = m.row[static_cast<std::size_t>(i)];
      const Index cl = m.col_left[static_cast<std::size_t>(i)];
      const Index cr = m.col_right[static_cast<std::size_t>(i)];
      const double* a = tables.sq_left.col(cl).data();
      const double* b = tables.sq_right.col(cr).data();
      const double akk = a[k * s0 + k];
      const double bll = b[lidx * s1 + lidx];
      const double own = akk * bll;
      diag[j] += own;

      // Cross term sum_q E[K_p K_q] nu_q[j] = A.row(k) * N_j * B.row(l)^T.
      for (Index l2 = 0; l2 < s1; ++l2) brow[l2] = b[l2 * s1 + lidx];
      Eigen::Map<const Eigen::MatrixXd> nj(nm.col(j).data(), s0, s1);
      w.noalias() = nj * brow;
      double cross = 0.0;
      for (Index k2 = 0; k2 < s0; ++k2) cross += a[k2 * s0 + k] * w[k2];

      const double mean_k = tables.mean_left(k, cl) * tables.mean_right(lidx, cr);
      rhs[j] += m.y[static_cast<std::size_t>(i)] * mean_k - (cross - nm(p, j) * own);
    }

    Eigen::MatrixXd prec = zfac * l;
    prec.diagonal() += e_tau_ * diag;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
      // The precision is PD in exact arithmetic but can be numerically
      // singular when a near-pruned slice's huge scale factor multiplies a
      // Laplacian with a nontrivial null space. Escalating diagonal jitter
      // restores a factorizable matrix without disturbing the healthy scale.
      const double scale = std::max(prec.diagonal().maxCoeff(), 1.0);
      for (double jitter = 1e-12; jitter <= 1e-2; jitter *= 100.0) {
        Eigen::MatrixXd damped = prec;
        damped.diagonal().array() += jitter * scale;
        llt.compute(damped);
        if (llt.info() == Eigen::Success) break;
      }
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("update_mode_fibers: non-PD precision matrix");
    }
    Eigen::MatrixXd sigma = llt.solve(identity);
    sigma = 0.5 * (sigma + sigma.transpose());
    const Eigen::VectorXd nu = e_tau_ * (sigma * rhs);

    sigmas_[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)] = sigma;
    for (Index j = 0; j < jd; ++j) {
      nm(p, j) = nu[j];
      sv(p, j) = sigma(j, j);
    }
  }
}

double VISolver::lambda_hat(Index b) const {
  return config_.gig_lambda -
         0.5 * static_cast<double>(shape_[static_cast<std::size_t>(b) - 1] *
                                   ranks_[static_cast<std::size_t>(b) - 1]) -
         0.5 * static_cast<double>(shape_[static_cast<std::size_t>(b)] *
                                   ranks_[static_cast<std::size_t>(b) + 1]);
}

void VISolver::update_a(Index b) {
  check_boundary(b);
  const double lam = lambda_hat(b);
  double c_hat = config_.gamma_c + 0.5 * lam;
  if (c_hat < 1e-3) {
    // Gamma shape must stay positive; strongly negative lambda_hat would
    // push it below zero.
    c_hat = 1e-3;
    ++clamped_c_warnings_;
  }
  const Index s = ranks_[static_cast<std::size_t>(b)];
  for (Index k = 0; k < s; ++k) {
    c_hat_[static_cast<std::size_t>(b)][k] = c_hat;
    f_hat_[static_cast<std::size_t>(b)][k] =
        config_.gamma_f + 0.5 * e_z_[static_cast<std::size_t>(b)][k];
  }
}

double VISolver::fiber_quad(Index d, Index p) const {
  const GraphLaplacian& l = laplacian(d);
  const Eigen::VectorXd nu = fiber_mean(d, p);
  const Eigen::MatrixXd& sigma = sigmas_[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)];
  if (l.is_identity) return nu.squaredNorm() + sigma.trace();
  return nu.dot(l.matrix * nu) + l.matrix.cwiseProduct(sigma).sum();
}

void VISolver::update_z(Index b) {
  check_boundary(b);
  const double lam = lambda_hat(b);
  const double right_factor = config_.asymmetric_z_sums ? 1.0 : 0.5;
  const Index s = ranks_[static_cast<std::size_t>(b)];
  const Index s_left = ranks_[static_cast<std::size_t>(b) - 1];   // left core's row count
  const Index s_right = ranks_[static_cast<std::size_t>(b) + 1];  // right core's column count
  for (Index k = 0; k < s; ++k) {
    double a_hat =
        c_hat_[static_cast<std::size_t>(b)][k] / f_hat_[static_cast<std::size_t>(b)][k];
    // Guard against under/overflow from degenerate neighbor slices.
    if (!std::isfinite(a_hat) || a_hat > 1e290) a_hat = 1e290;
    if (a_hat < 1e-290) a_hat = 1e-290;
    double left_sum = 0.0;
    for (Index mm = 0; mm < s_left; ++mm)
      left_sum +=
          e_inv_z_[static_cast<std::size_t>(b) - 1][mm] * fiber_quad(b - 1, k * s_left + mm);
    double right_sum = 0.0;
    for (Index n = 0; n < s_right; ++n)
      right_sum += e_inv_z_[static_cast<std::size_t>(b) + 1][n] * fiber_quad(b, n * s + k);
    double b_hat = config_.gig_b + 0.5 * left_sum + right_factor * right_sum;
    if (!std::isfinite(b_hat) || b_hat > 1e290) b_hat = 1e290;

    z_post_[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] =
        GIGPosterior{a_hat, b_hat, lam};
    const GIGMoments mom = gig_moments(a_hat, b_hat, lam);
    e_z_[static_cast<std::size_t>(b)][k] = mom.mean_z;
    e_inv_z_[static_cast<std::size_t>(b)][k] = mom.mean_inv_z;
  }
}

void VISolver::update_tau() {
  const double alpha_hat = config_.tau_alpha + 0.5 * static_cast<double>(observed_count_);
  // Bracket of the rate update: sum_Omega (y^2 - 2 y E[x] + E[x^2]) via the
  // mode-0 chains (A is scalar 1 there).
  const SubchainPair sc = subchains(mean_tt(), 0);
  const Eigen::MatrixXd sq_right = chain_sq_right(1);
  const Eigen::MatrixXd& nm = numat_[0];
  const Eigen::MatrixXd& sv = svar_[0];
  const Index s1 = ranks_[1];
  const ModeObs& m = obs_[0];
  double bracket = y_sq_sum_;
  for (std::size_t i = 0; i < m.row.size(); ++i) {
    const Index j = m.row[i];
    const Index cr = m.col_right[i];
    const auto nu_j = nm.col(j);
    const double ex = nu_j.dot(sc.right.col(cr));
    Eigen::Map<const Eigen::MatrixXd> b(sq_right.col(cr).data(), s1, s1);
    double ex2 = nu_j.dot(b * nu_j);
    for (Index l = 0; l < s1; ++l) ex2 += sv(l, j) * b(l, l);
    bracket += -2.0 * m.y[i] * ex + ex2;
  }
  const double beta_hat = config_.tau_beta + 0.5 * bracket;
  if (!(beta_hat > 0.0)) throw std::runtime_error("update_tau: nonpositive rate");
  tau_ = NoisePosterior{alpha_hat, beta_hat};
  e_tau_ = alpha_hat / beta_hat;
}

void VISolver::prune() {
  if (config_.prune_threshold <= 0.0) return;
  for (Index b = 1; b < order(); ++b) {
    const Index s = ranks_[static_cast<std::size_t>(b)];
    if (s <= 1) continue;
    const Index s_left = ranks_[static_cast<std::size_t>(b) - 1];
    const Index s_right = ranks_[static_cast<std::size_t>(b) + 1];
    const Index j_left = shape_[static_cast<std::size_t>(b) - 1];
    const Index j_right = shape_[static_cast<std::size_t>(b)];
    const Eigen::MatrixXd& nm_l = numat_[static_cast<std::size_t>(b) - 1];
    const Eigen::MatrixXd& sv_l = svar_[static_cast<std::size_t>(b) - 1];
    const Eigen::MatrixXd& nm_r = numat_[static_cast<std::size_t>(b)];
    const Eigen::MatrixXd& sv_r = svar_[static_cast<std::size_t>(b)];

    Eigen::VectorXd pow_left = Eigen::VectorXd::Zero(s);
    Eigen::VectorXd pow_right = Eigen::VectorXd::Zero(s);
    // Mean power only: the posterior variance of a dead slice has a floor of
    // 1/(scale-factor * smallest Laplacian eigenvalue) along the graph's
    // near-null direction, which would mask slices whose means have fully
    // collapsed.
    for (Index k = 0; k < s; ++k) {
      for (Index mm = 0; mm < s_left; ++mm) {
        const Index p = k * s_left + mm;
        pow_left[k] += nm_l.row(p).squaredNorm();
      }
      pow_left[k] /= static_cast<double>(s_left * j_left);
      for (Index n = 0; n < s_right; ++n) {
        const Index p = n * s + k;
        pow_right[k] += nm_r.row(p).squaredNorm();
      }
      pow_right[k] /= static_cast<double>(s_right * j_right);
    }

    std::vector<Index> keep;
    for (Index k = 0; k < s; ++k)
      if (pow_left[k] >= config_.prune_threshold || pow_right[k] >= config_.prune_threshold)
        keep.push_back(k);
    if (static_cast<Index>(keep.size()) == s) continue;
    if (keep.empty()) {
      Index best = 0;
      (pow_left + pow_right).maxCoeff(&best);
      keep.push_back(best);
    }
    const Index new_s = static_cast<Index>(keep.size());

    // Shrink the left core: fibers p = k * S_left + m keep only k in `keep`.
    {
      Eigen::MatrixXd new_nm(new_s * s_left, j_left);
      Eigen::MatrixXd new_sv(new_s * s_left, j_left);
      std::vector<Eigen::MatrixXd> new_sig(static_cast<std::size_t>(new_s * s_left));
      for (Index nk = 0; nk < new_s; ++nk)
        for (Index mm = 0; mm < s_left; ++mm) {
          const Index np = nk * s_left + mm;
          const Index op = keep[static_cast<std::size_t>(nk)] * s_left + mm;
          new_nm.row(np) = nm_l.row(op);
          new_sv.row(np) = sv_l.row(op);
          new_sig[static_cast<std::size_t>(np)] =
              std::move(sigmas_[static_cast<std::size_t>(b) - 1][static_cast<std::size_t>(op)]);
        }
      numat_[static_cast<std::size_t>(b) - 1] = std::move(new_nm);
      svar_[static_cast<std::size_t>(b) - 1] = std::move(new_sv);
      sigmas_[static_cast<std::size_t>(b) - 1] = std::move(new_sig);
    }
    // Shrink the right core: fibers p = n * S + k keep only k in `keep`.
    {
      Eigen::MatrixXd new_nm(s_right * new_s, j_right);
      Eigen::MatrixXd new_sv(s_right * new_s, j_right);
      std::vector<Eigen::MatrixXd> new_sig(static_cast<std::size_t>(s_right * new_s));
      for (Index n = 0; n < s_right; ++n)
        for (Index nk = 0; nk < new_s; ++nk) {
          const Index np = n * new_s + nk;
          const Index op = n * s + keep[static_cast<std::size_t>(nk)];
          new_nm.row(np) = nm_r.row(op);
          new_sv.row(np) = sv_r.row(op);
          new_sig[static_cast<std::size_t>(np)] =
              std::move(sigmas_[static_cast<std::size_t>(b)][static_cast<std::size_t>(op)]);
        }
      numat_[static_cast<std::size_t>(b)] = std::move(new_nm);
      svar_[static_cast<std::size_t>(b)] = std::move(new_sv);
      sigmas_[static_cast<std::size_t>(b)] = std::move(new_sig);
    }
    // Shrink the boundary posteriors.
    {
      Eigen::VectorXd ez(new_s), einv(new_s), ch(new_s), fh(new_s);
      std::vector<GIGPosterior> zp(static_cast<std::size_t>(new_s));
      for (Index nk = 0; nk < new_s; ++nk) {
        const Index ok = keep[static_cast<std::size_t>(nk)];
        ez[nk] = e_z_[static_cast<std::size_t>(b)][ok];
        einv[nk] = e_inv_z_[static_cast<std::size_t>(b)][ok];
        ch[nk] = c_hat_[static_cast<std::size_t>(b)][ok];
        fh[nk] = f_hat_[static_cast<std::size_t>(b)][ok];
        zp[static_cast<std::size_t>(nk)] =
            z_post_[static_cast<std::size_t>(b)][static_cast<std::size_t>(ok)];
      }
      e_z_[static_cast<std::size_t>(b)] = std::move(ez);
      e_inv_z_[static_cast<std::size_t>(b)] = std::move(einv);
      c_hat_[static_cast<std::size_t>(b)] = std::move(ch);
      f_hat_[static_cast<std::size_t>(b)] = std::move(fh);
      z_post_[static_cast<std::size_t>(b)] = std::move(zp);
    }
    ranks_[static_cast<std::size_t>(b)] = new_s;
  }
}

VIResult VISolver::run() {
  VIResult res;
  // Calibrate the noise precision to the initialization before the first
  // fiber sweep; starting from the vague prior's E[tau] makes the scale
  // prior overpower the data term on small-magnitude inputs and the means
  // can collapse to the dead zero fixed point.
  if (config_.max_iters > 0) update_tau();
  DenseTensor prev = tt_reconstruct(mean_tt());
  for (Index it = 1; it <= config_.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    for (Index pass = 0; pass < std::max<Index>(config_.fiber_sweeps_per_iter, 1); ++pass)
      for (Index d = 0; d < order(); ++d) update_mode_fibers(d);
    for (Index b = 1; b < order(); ++b) update_a(b);
    for (Index b = 1; b < order(); ++b) update_z(b);
    update_tau();
    prune();
    DenseTensor recon = tt_reconstruct(mean_tt());
    const auto t1 = std::chrono::steady_clock::now();

    const double rel = (recon.values() - prev.values()).norm() /
                       std::max(prev.values().norm(), 1e-30);
    res.recon_change_trace.push_back(rel);
    res.iter_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    res.rank_history.push_back(ranks_);
    res.iters = it;
    if (config_.on_iter) config_.on_iter(it, mean_tt());
    prev = std::move(recon);
    if (rel < config_.rel_change_tol) break;
  }
  res.mean = mean_tt();
  res.ranks = ranks_;
  res.e_tau = e_tau_;
  return res;
}

void VISolver::zero_covariances() {
  for (std::size_t d = 0; d < sigmas_.size(); ++d) {
    for (Eigen::MatrixXd& s : sigmas_[d]) s.setZero();
    svar_[d].setZero();
  }
}

void VISolver::set_z_moments(Index b, const Eigen::VectorXd& mean_z,
                             const Eigen::VectorXd& mean_inv_z) {
  check_boundary(b);
  if (mean_z.size() != ranks_[static_cast<std::size_t>(b)] ||
      mean_inv_z.size() != ranks_[static_cast<std::size_t>(b)])
    throw std::invalid_argument("set_z_moments: size mismatch");
  e_z_[static_cast<std::size_t>(b)] = mean_z;
  e_inv_z_[static_cast<std::size_t>(b)] = mean_inv_z;
}

void VISolver::set_tau_moment(double e_tau) {
  if (e_tau <= 0.0) throw std::invalid_argument("set_tau_moment: must be positive");
  e_tau_ = e_tau;
}

const Eigen::VectorXd& VISolver::z_mean(Index b) const {
  return e_z_[static_cast<std::size_t>(b)];
}
const Eigen::VectorXd& VISolver::z_mean_inv(Index b) const {
  return e_inv_z_[static_cast<std::size_t>(b)];
}
const std::vector<GIGPosterior>& VISolver::z_posterior(Index b) const {
  check_boundary(b);
  return z_post_[static_cast<std::size_t>(b)];
}

VIResult run_graphtt_vi(const DenseTensor& y, const ObservationMask& o, const VIConfig& config) {
  VISolver solver(y, o, config);
  return solver.run();
}

}  // namespace graphtt
