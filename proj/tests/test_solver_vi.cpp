#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "graphtt/data.hpp"
#include "graphtt/metrics.hpp"
#include "graphtt/solver_opt.hpp"
#include "graphtt/solver_vi.hpp"

using namespace graphtt;

namespace {

// Log-sum-exp Simpson rule for log(integral of exp(f)) on [lo, hi].
template <typename F>
double log_simpson(F f, double lo, double hi, int n /* odd point count */) {
  const double h = (hi - lo) / (n - 1);
  double fmax = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    vals[static_cast<std::size_t>(i)] = f(lo + h * i);
    fmax = std::max(fmax, vals[static_cast<std::size_t>(i)]);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::exp(vals[static_cast<std::size_t>(i)] - fmax);
  }
  return fmax + std::log(acc * h / 3.0);
}

// Quadrature oracle for log K_nu(x): integral_0^inf e^{-x cosh t} cosh(nu t) dt.
double log_bessel_quad(double nu, double x) {
  nu = std::abs(nu);
  auto f = [&](double t) {
    // log cosh(nu t) computed stably.
    const double a = nu * t;
    const double logcosh = (a > 30.0) ? a - std::log(2.0) : std::log(std::cosh(a));
    return -x * std::cosh(t) + logcosh;
  };
  const double tstar = std::asinh(nu / x);
  const double fmax = f(tstar);
  double hi = tstar + 1.0;
  while (f(hi) > fmax - 80.0) hi += 1.0;
  return log_simpson(f, 0.0, hi, 200001);
}

// Quadrature oracle for GIG moments E[z^k] via z = e^u.
double gig_moment_quad(double a, double b, double lambda, double k) {
  auto make_f = [&](double kk) {
    return [=](double u) {
      return (lambda + kk) * u - 0.5 * (a * std::exp(u) + b * std::exp(-u));
    };
  };
  auto f0 = make_f(0.0);
  // Bracket the mass of the base density around its scanned argmax.
  double best = -std::numeric_limits<double>::infinity();
  double ubest = 0.0;
  for (double u = -200.0; u <= 200.0; u += 0.25) {
    const double v = f0(u);
    if (v > best) {
      best = v;
      ubest = u;
    }
  }
  double lo = ubest, hi = ubest;
  while (f0(lo) > best - 120.0 && lo > -400.0) lo -= 1.0;
  while (f0(hi) > best - 120.0 && hi < 400.0) hi += 1.0;
  lo -= 5.0;
  hi += 5.0;
  const double log_num = log_simpson(make_f(k), lo, hi, 400001);
  const double log_den = log_simpson(f0, lo, hi, 400001);
  return std::exp(log_num - log_den);
}

VIConfig basic_config(const std::vector<Index>& ranks) {
  VIConfig cfg;
  cfg.init_ranks = ranks;
  return cfg;
}

}  // namespace

TEST_CASE("log_bessel_k half-integer closed forms") {
  // K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
  for (double x : {0.1, 1.0, 5.0, 50.0}) {
    const double expect = 0.5 * std::log(M_PI / (2.0 * x)) - x;
    CHECK(log_bessel_k(0.5, x) == doctest::Approx(expect).epsilon(1e-12));
    // K_{3/2}(x) = K_{1/2}(x) (1 + 1/x)
    CHECK(log_bessel_k(1.5, x) == doctest::Approx(expect + std::log1p(1.0 / x)).epsilon(1e-12));
    // K_{5/2}(x) = K_{1/2}(x) (1 + 3/x + 3/x^2)
    CHECK(log_bessel_k(2.5, x) ==
          doctest::Approx(expect + std::log(1.0 + 3.0 / x + 3.0 / (x * x))).epsilon(1e-12));
  }
  CHECK(log_bessel_k(0.5, 1.0) == doctest::Approx(0.5 * std::log(M_PI / 2.0) - 1.0));
  CHECK_THROWS(log_bessel_k(1.0, 0.0));
  CHECK_THROWS(log_bessel_k(1.0, -2.0));
}

TEST_CASE("log_bessel_k order symmetry") {
  for (double x : {0.1, 1.0, 10.0})
    CHECK(log_bessel_k(-3.0, x) == doctest::Approx(log_bessel_k(3.0, x)).epsilon(1e-14));
}

TEST_CASE("log_bessel_k against the integral-representation quadrature") {
  CHECK(log_bessel_k(7.3, 2.5) == doctest::Approx(log_bessel_quad(7.3, 2.5)).epsilon(1e-10));
  CHECK(log_bessel_k(0.0, 1.0) == doctest::Approx(log_bessel_quad(0.0, 1.0)).epsilon(1e-10));
  CHECK(log_bessel_k(25.0, 0.3) == doctest::Approx(log_bessel_quad(25.0, 0.3)).epsilon(1e-9));
  CHECK(log_bessel_k(1000.0, 500.0) ==
        doctest::Approx(log_bessel_quad(1000.0, 500.0)).epsilon(1e-8));
}

TEST_CASE("log_bessel_k is consistent across the large-order branch switch") {
  // Three-term recurrence K_{v+1}(x) = K_{v-1}(x) + (2v/x) K_v(x) bridged
  // across the GSL/asymptotic boundary (around order 500).
  for (double x : {50.0, 300.0, 2000.0}) {
    const double v = 500.2;
    const double lk0 = log_bessel_k(v - 1.0, x);
    const double lk1 = log_bessel_k(v, x);
    const double lk2 = log_bessel_k(v + 1.0, x);
    const double predicted = lk0 + std::log1p((2.0 * v / x) * std::exp(lk1 - lk0));
    CHECK(lk2 == doctest::Approx(predicted).epsilon(1e-7));
  }
}

TEST_CASE("gig_moments closed-form example and Jensen inequality") {
  const GIGMoments m = gig_moments(1.0, 1.0, 0.5);
  CHECK(m.mean_z == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.mean_inv_z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(gig_moments(0.0, 1.0, 0.5));
  CHECK_THROWS(gig_moments(1.0, -1.0, 0.5));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ul(-100.0, 5.0), ua(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = std::exp(ua(rng)), b = std::exp(ua(rng)), l = ul(rng);
    const GIGMoments mm = gig_moments(a, b, l);
    REQUIRE(mm.mean_z > 0.0);
    REQUIRE(mm.mean_inv_z > 0.0);
    REQUIRE(mm.mean_z * mm.mean_inv_z >= 1.0 - 1e-10);
  }
}

TEST_CASE("gig_moments against density quadrature on random triples") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ul(-50.0, 5.0), ua(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double a = std::exp(ua(rng)), b = std::exp(ua(rng)), l = ul(rng);
    const GIGMoments m = gig_moments(a, b, l);
    const double ez = gig_moment_quad(a, b, l, 1.0);
    const double einv = gig_moment_quad(a, b, l, -1.0);
    REQUIRE(m.mean_z == doctest::Approx(ez).epsilon(1e-8));
    REQUIRE(m.mean_inv_z == doctest::Approx(einv).epsilon(1e-8));
  }
}

TEST_CASE("expected_slice_kron: deterministic limit and scalar case") {
  SyntheticSpec sp;
  sp.shape = {3, 3, 3};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 3;
  const DenseTensor y = gen_synthetic_tt(sp).truth;
  VISolver vs(y, ObservationMask(sp.shape, true), basic_config({1, 2, 2, 1}));

  vs.zero_covariances();
  const TTFormat mean = vs.mean_tt();
  const Eigen::MatrixXd n = mean.cores[1].slice(0);
  Eigen::MatrixXd kron(4, 4);
  for (Index l1 = 0; l1 < 2; ++l1)
    for (Index l2 = 0; l2 < 2; ++l2)
      for (Index k1 = 0; k1 < 2; ++k1)
        for (Index k2 = 0; k2 < 2; ++k2)
          kron(k1 * 2 + k2, l1 * 2 + l2) = n(k1, l1) * n(k2, l2);
  CHECK((vs.expected_slice_kron(1, 0) - kron).cwiseAbs().maxCoeff() < 1e-14);

  // Scalar case via the boundary core: S_0 = 1, S_1 = 2 gives a 1x4 matrix
  // whose (0, l*2+l) entries are nu^2 + Sigma_jj.
  VISolver vs2(y, ObservationMask(sp.shape, true), basic_config({1, 2, 2, 1}));
  const Eigen::MatrixXd m0 = vs2.expected_slice_kron(0, 1);
  for (Index l = 0; l < 2; ++l) {
    const double nu = vs2.fiber_mean(0, l)[1];
    const double var = vs2.fiber_cov(0, l)(1, 1);
    CHECK(m0(0, l * 2 + l) == doctest::Approx(nu * nu + var).epsilon(1e-12));
  }
}

TEST_CASE("expected_slice_kron matches a Monte-Carlo sampling oracle") {
  SyntheticSpec sp;
  sp.shape = {3, 3, 3};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 4;
  const DenseTensor y = add_noise(gen_synthetic_tt(sp).truth, 0.1, 5);
  VIConfig cfg = basic_config({1, 2, 2, 1});
  WeightSpec w;
  w.alpha = 0.5;
  w.n = 3;
  cfg.laplacians.assign(3, laplacian_from_spec(w));
  VISolver vs(y, random_mask(sp.shape, 0.2, 6), cfg);
  vs.update_mode_fibers(1);  // make the covariances non-trivial

  const Index d = 1, j = 2, s0 = 2, s1 = 2, jd = 3;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> chols;
  for (Index p = 0; p < s0 * s1; ++p) {
    means.push_back(vs.fiber_mean(d, p));
    chols.push_back(Eigen::LLT<Eigen::MatrixXd>(vs.fiber_cov(d, p)).matrixL());
  }

  const int nsamp = 100000;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s0 * s0, s1 * s1);
  Eigen::MatrixXd acc2 = Eigen::MatrixXd::Zero(s0 * s0, s1 * s1);
  Eigen::MatrixXd slice(s0, s1);
  for (int s = 0; s < nsamp; ++s) {
    for (Index p = 0; p < s0 * s1; ++p) {
      Eigen::VectorXd zvec(jd);
      for (Index i = 0; i < jd; ++i) zvec[i] = g(rng);
      const Eigen::VectorXd fib = means[static_cast<std::size_t>(p)] +
                                  chols[static_cast<std::size_t>(p)] * zvec;
      slice(p % s0, p / s0) = fib[j];
    }
    for (Index l1 = 0; l1 < s1; ++l1)
      for (Index l2 = 0; l2 < s1; ++l2)
        for (Index k1 = 0; k1 < s0; ++k1)
          for (Index k2 = 0; k2 < s0; ++k2) {
            const double v = slice(k1, l1) * slice(k2, l2);
            acc(k1 * s0 + k2, l1 * s1 + l2) += v;
            acc2(k1 * s0 + k2, l1 * s1 + l2) += v * v;
          }
  }
  acc /= double(nsamp);
  acc2 /= double(nsamp);
  const Eigen::MatrixXd expect = vs.expected_slice_kron(d, j);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 4; ++c) {
      const double se =
          std::sqrt(std::max(acc2(r, c) - acc(r, c) * acc(r, c), 0.0) / double(nsamp));
      REQUIRE(std::abs(acc(r, c) - expect(r, c)) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("expected_subchain_second_moment: deterministic limit and dominance") {
  SyntheticSpec sp;
  sp.shape = {3, 4, 2};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 8;
  const DenseTensor y = gen_synthetic_tt(sp).truth;
  VISolver vs(y, ObservationMask(sp.shape, true), basic_config({1, 2, 2, 1}));

  // Zero covariances: equals the deterministic K_p K_q outer product.
  {
    VISolver det = vs;
    det.zero_covariances();
    const TTFormat mean = det.mean_tt();
    const SubchainPair sc = subchains(mean, 1);
    const Eigen::MatrixXd k = subchain_kron(sc);
    const Index cl = 2, cr = 1;
    const Index col = cr * sc.left.cols() + cl;
    const Eigen::MatrixXd m = det.expected_subchain_second_moment(1, cl, cr);
    for (Index p = 0; p < 4; ++p)
      for (Index q = 0; q < 4; ++q)
        CHECK(m(p, q) == doctest::Approx(k(p, col) * k(q, col)).epsilon(1e-10));
  }

  // With covariances: diagonal dominates the squared mean chain.
  {
    const SubchainPair sc = subchains(vs.mean_tt(), 1);
    const Index cl = 1, cr = 0;
    const Eigen::MatrixXd m = vs.expected_subchain_second_moment(1, cl, cr);
    for (Index p = 0; p < 4; ++p) {
      const double mean_p = sc.left(p % 2, cl) * sc.right(p / 2, cr);
      REQUIRE(m(p, p) >= mean_p * mean_p - 1e-12);
    }
  }
}

TEST_CASE("degeneracy link: zero-covariance VI fiber sweep equals GraphTT-opt") {
  SyntheticSpec sp;
  sp.shape = {4, 3, 3};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 9;
  const DenseTensor y = add_noise(gen_synthetic_tt(sp).truth, 0.05, 10);
  const auto o = random_mask(sp.shape, 0.25, 11);

  VIConfig vcfg = basic_config({1, 2, 2, 1});
  WeightSpec w;
  w.alpha = 0.8;
  vcfg.laplacians.clear();
  for (Index jd : sp.shape) {
    w.n = jd;
    vcfg.laplacians.push_back(laplacian_from_spec(w));
  }
  vcfg.seed = 12;
  vcfg.laplacian_ridge = 0.0;  // compare against the opt solver's exact Laplacians
  VISolver vs(y, o, vcfg);
  vs.zero_covariances();
  const double e_tau = 2.3;
  vs.set_tau_moment(e_tau);
  const double zb1 = 0.7, zb2 = 1.9;
  vs.set_z_moments(1, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Constant(2, zb1));
  vs.set_z_moments(2, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Constant(2, zb2));
  const TTFormat init = vs.mean_tt();

  OptConfig ocfg;
  ocfg.ranks = {1, 2, 2, 1};
  ocfg.laplacians = vcfg.laplacians;
  OptSolver os(y, o, ocfg, init);
  // beta_d = E[1/z_k] E[1/z_l] / E[tau]; boundary z moments are 1.
  os.set_betas({zb1 / e_tau, zb1 * zb2 / e_tau, zb2 / e_tau});

  const std::vector<Index> ranks = vs.ranks();
  for (Index d = 0; d < 3; ++d) {
    vs.update_mode_fibers(d);
    vs.zero_covariances();  // keep the point-mass regime for later modes
    os.prepare_mode(d);
    const Index p_total =
        ranks[static_cast<std::size_t>(d)] * ranks[static_cast<std::size_t>(d) + 1];
    for (Index p = 0; p < p_total; ++p) os.update_fiber(d, p);
    const Eigen::MatrixXd a = vs.mean_tt().cores[static_cast<std::size_t>(d)].unfold3();
    const Eigen::MatrixXd b = os.tt().cores[static_cast<std::size_t>(d)].unfold3();
    REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("lambda_hat direct substitution example") {
  SyntheticSpec sp;
  sp.shape = {20, 20, 5};
  sp.ranks = {1, 3, 5, 1};
  sp.seed = 13;
  const DenseTensor y = gen_synthetic_tt(sp).truth;
  VISolver vs(y, ObservationMask(sp.shape, true), basic_config({1, 3, 5, 1}));
  REQUIRE(vs.ranks() == std::vector<Index>{1, 3, 5, 1});
  vs.update_a(1);
  vs.update_z(1);
  for (const GIGPosterior& zp : vs.z_posterior(1))
    CHECK(zp.lambda_hat == doctest::Approx(-60.5).epsilon(1e-14));
}

TEST_CASE("update_tau: point-mass bracket equals the masked residual") {
  SyntheticSpec sp;
  sp.shape = {4, 3, 3};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 14;
  const DenseTensor y = add_noise(gen_synthetic_tt(sp).truth, 0.1, 15);
  const auto o = random_mask(sp.shape, 0.3, 16);
  VIConfig cfg = basic_config({1, 2, 2, 1});
  VISolver vs(y, o, cfg);
  vs.zero_covariances();
  vs.update_tau();

  const DenseTensor recon = tt_reconstruct(vs.mean_tt());
  double ref = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    if (o.observed(i)) ref += (y[i] - recon[i]) * (y[i] - recon[i]);
  const NoisePosterior& np = vs.noise_posterior();
  CHECK(np.alpha_hat == doctest::Approx(cfg.tau_alpha + 0.5 * double(o.observed_count())));
  CHECK(np.beta_hat == doctest::Approx(cfg.tau_beta + 0.5 * ref).epsilon(1e-10));
}

TEST_CASE("update_tau bracket matches a Monte-Carlo posterior-sampling oracle") {
  SyntheticSpec sp;
  sp.shape = {3, 3};
  sp.ranks = {1, 2, 1};
  sp.seed = 17;
  const DenseTensor y = add_noise(gen_synthetic_tt(sp).truth, 0.2, 18);
  const auto o = random_mask(sp.shape, 0.2, 19);
  VIConfig cfg = basic_config({1, 2, 1});
  VISolver vs(y, o, cfg);
  vs.update_mode_fibers(0);  // non-trivial covariances
  vs.update_mode_fibers(1);
  vs.update_tau();
  const double bracket = 2.0 * (vs.noise_posterior().beta_hat - cfg.tau_beta);

  std::mt19937_64 rng(20);
  std::normal_distribution<double> g;
  const int nsamp = 40000;
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < nsamp; ++s) {
    TTFormat sample = vs.mean_tt();
    for (Index d = 0; d < 2; ++d) {
      const Index p_total = sample.cores[static_cast<std::size_t>(d)].r0 *
                            sample.cores[static_cast<std::size_t>(d)].r1;
      for (Index p = 0; p < p_total; ++p) {
        const Eigen::VectorXd mean = vs.fiber_mean(d, p);
        const Eigen::MatrixXd chol =
            Eigen::LLT<Eigen::MatrixXd>(vs.fiber_cov(d, p)).matrixL();
        Eigen::VectorXd zvec(mean.size());
        for (Index i = 0; i < mean.size(); ++i) zvec[i] = g(rng);
        const Eigen::VectorXd fib = mean + chol * zvec;
        for (Index j = 0; j < mean.size(); ++j)
          sample.cores[static_cast<std::size_t>(d)].data[j * p_total + p] = fib[j];
      }
    }
    const DenseTensor x = tt_reconstruct(sample);
    double r = 0.0;
    for (Index i = 0; i < y.size(); ++i)
      if (o.observed(i)) r += (y[i] - x[i]) * (y[i] - x[i]);
    acc += r;
    acc2 += r * r;
  }
  acc /= double(nsamp);
  acc2 /= double(nsamp);
  const double se = std::sqrt(std::max(acc2 - acc * acc, 0.0) / double(nsamp));
  CHECK(std::abs(acc - bracket) <= 3.0 * se + 1e-10);
}

TEST_CASE("covariances stay symmetric positive definite over iterations") {
  SyntheticSpec sp;
  sp.shape = {5, 4, 3};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 21;
  const DenseTensor y = add_noise(gen_synthetic_tt(sp).truth, 0.1, 22);
  VIConfig cfg = basic_config({1, 3, 3, 1});
  cfg.max_iters = 5;
  cfg.rel_change_tol = 1e-14;
  VISolver vs(y, random_mask(sp.shape, 0.3, 23), cfg);
  for (int it = 0; it < 5; ++it) {
    for (Index d = 0; d < 3; ++d) vs.update_mode_fibers(d);
    for (Index b = 1; b < 3; ++b) vs.update_a(b);
    for (Index b = 1; b < 3; ++b) vs.update_z(b);
    vs.update_tau();
    for (Index d = 0; d < 3; ++d) {
      const Index p_total = vs.ranks()[static_cast<std::size_t>(d)] *
                            vs.ranks()[static_cast<std::size_t>(d) + 1];
      for (Index p = 0; p < p_total; ++p) {
        const Eigen::MatrixXd& s = vs.fiber_cov(d, p);
        REQUIRE((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        REQUIRE(es.eigenvalues().minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("scalar Bayes oracle: single observed value") {
  DenseTensor y(Shape{1}, Eigen::VectorXd::Constant(1, 1.7));
  VIConfig cfg = basic_config({1, 1});
  VISolver vs(y, ObservationMask(Shape{1}, true), cfg);
  vs.zero_covariances();
  vs.set_tau_moment(2.0);
  vs.update_mode_fibers(0);
  // Sigma = 1/(E[tau] + 1), nu = E[tau] Sigma y  (identity L, unit z factor).
  CHECK(vs.fiber_cov(0, 0)(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(vs.fiber_mean(0, 0)[0] == doctest::Approx(2.0 * 1.7 / 3.0).epsilon(1e-12));
}

TEST_CASE("prune: threshold zero never prunes; ranks monotone during a run") {
  SyntheticSpec sp;
  sp.shape = {8, 8, 8};
  sp.ranks = {1, 2, 2, 1};
  sp.seed = 31;
  const DenseTensor truth = gen_synthetic_tt(sp).truth;
  const DenseTensor y = add_noise(truth, snr_to_sigma2(truth, 20.0), 32);
  const auto o = random_mask(sp.shape, 0.3, 33);

  VIConfig cfg = basic_config({1, 4, 4, 1});
  cfg.prune_threshold = 0.0;
  cfg.max_iters = 3;
  VISolver vs(y, o, cfg);
  const auto before = vs.ranks();
  for (int i = 0; i < 3; ++i) {
    for (Index d = 0; d < 3; ++d) vs.update_mode_fibers(d);
    vs.prune();
  }
  CHECK(vs.ranks() == before);

  cfg.prune_threshold = 1e-7;
  cfg.max_iters = 15;
  cfg.rel_change_tol = 1e-8;
  VIResult res = run_graphtt_vi(y, o, cfg);
  for (std::size_t it = 1; it < res.rank_history.size(); ++it)
    for (std::size_t b = 0; b < res.rank_history[it].size(); ++b)
      REQUIRE(res.rank_history[it][b] <= res.rank_history[it - 1][b]);
  CHECK(rse(truth, tt_reconstruct(res.mean)) < 0.3);
}

TEST_CASE("tau calibration on fully observed noisy data") {
  SyntheticSpec sp;
  sp.shape = {10, 10, 10};
  sp.ranks = {1, 3, 3, 1};
  sp.seed = 41;
  const DenseTensor truth = gen_synthetic_tt(sp).truth;
  const double sigma2 = 0.01;
  const DenseTensor y = add_noise(truth, sigma2, 42);
  VIConfig cfg = basic_config({1, 5, 5, 1});
  cfg.max_iters = 30;
  cfg.rel_change_tol = 1e-7;
  const VIResult res = run_graphtt_vi(y, ObservationMask(sp.shape, true), cfg);
  CHECK(res.e_tau >= 0.5 / sigma2);
  CHECK(res.e_tau <= 2.0 / sigma2);
}

TEST_CASE("max_iters = 0 returns the initialization") {
  SyntheticSpec sp;
  sp.shape = {5, 4};
  sp.ranks = {1, 2, 1};
  sp.seed = 51;
  const DenseTensor y = gen_synthetic_tt(sp).truth;
  VIConfig cfg = basic_config({1, 2, 1});
  cfg.max_iters = 0;
  cfg.seed = 52;
  const VIResult res = run_graphtt_vi(y, ObservationMask(sp.shape, true), cfg);
  const TTFormat init = init_fill_ttsvd(y, ObservationMask(sp.shape, true), {1, 2, 1}, 52);
  CHECK(res.iters == 0);
  for (std::size_t d = 0; d < 2; ++d)
    CHECK((res.mean.cores[d].data - init.cores[d].data).norm() == 0.0);
}
