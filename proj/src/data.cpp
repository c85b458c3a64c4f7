#include "graphtt/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace graphtt {

void ObservationMask::recount() {
  observed_count_ = 0;
  for (std::uint8_t f : flags_) observed_count_ += (f != 0);
}

ObservationMask ObservationMask::operator&(const ObservationMask& other) const {
  if (shape_ != other.shape_) throw std::invalid_argument("ObservationMask: shape mismatch");
  ObservationMask out(shape_, false);
  for (std::size_t i = 0; i < flags_.size(); ++i)
    out.flags_[i] = (flags_[i] && other.flags_[i]) ? 1 : 0;
  out.recount();
  return out;
}

DenseTensor ObservationMask::to_tensor() const {
  Eigen::VectorXd v(static_cast<Index>(flags_.size()));
  for (std::size_t i = 0; i < flags_.size(); ++i) v[static_cast<Index>(i)] = flags_[i] ? 1.0 : 0.0;
  return DenseTensor(shape_, std::move(v));
}

ObservationMask ObservationMask::from_tensor(const DenseTensor& t) {
  ObservationMask m(t.shape(), false);
  for (Index i = 0; i < t.size(); ++i) {
    const double v = t.values()[i];
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("ObservationMask::from_tensor: entries must be 0 or 1");
    m.flags_[static_cast<std::size_t>(i)] = (v != 0.0) ? 1 : 0;
  }
  m.recount();
  return m;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over (seed, stream) so trial streams are decorrelated.
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  auto mix = [&x]() {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::seed_seq seq{static_cast<std::uint32_t>(mix()), static_cast<std::uint32_t>(mix() >> 32),
                    static_cast<std::uint32_t>(mix()), static_cast<std::uint32_t>(mix() >> 32)};
  return std::mt19937_64(seq);
}

ObservationMask random_mask(const Shape& shape, double missing_rate, std::uint64_t seed) {
  if (missing_rate < 0.0 || missing_rate >= 1.0)
    throw std::invalid_argument("random_mask: missing_rate must be in [0, 1)");
  auto rng = make_rng(seed, 17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ObservationMask m(shape, false);
  for (Index i = 0; i < m.size(); ++i) m.set(i, u(rng) >= missing_rate);
  m.recount();
  return m;
}

ObservationMask slice_mask(const Shape& shape, Index mode, double fraction, std::uint64_t seed) {
  const Index order = static_cast<Index>(shape.size());
  if (mode < 0 || mode >= order) throw std::out_of_range("slice_mask: mode out of range");
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("slice_mask: fraction must be in [0, 1]");
  const Index jd = shape[static_cast<std::size_t>(mode)];
  Index n_remove = static_cast<Index>(std::floor(fraction * static_cast<double>(jd)));
  n_remove = std::min(n_remove, jd);
  std::vector<Index> order_idx(static_cast<std::size_t>(jd));
  std::iota(order_idx.begin(), order_idx.end(), 0);
  auto rng = make_rng(seed, 29);
  std::shuffle(order_idx.begin(), order_idx.end(), rng);
  std::vector<std::uint8_t> removed(static_cast<std::size_t>(jd), 0);
  for (Index i = 0; i < n_remove; ++i) removed[static_cast<std::size_t>(order_idx[i])] = 1;

  ObservationMask m(shape, true);
  std::vector<Index> idx(static_cast<std::size_t>(order), 0);
  for (Index lin = 0; lin < m.size(); ++lin) {
    if (removed[static_cast<std::size_t>(idx[static_cast<std::size_t>(mode)])]) m.set(lin, false);
    next_multi_index(idx, shape);
  }
  m.recount();
  return m;
}

ObservationMask stencil_mask(const Shape& shape, const std::vector<std::uint8_t>& stencil,
                             Index stencil_rows, Index stencil_cols) {
  if (shape.size() < 2) throw std::invalid_argument("stencil_mask: need at least 2 modes");
  if (shape[0] != stencil_rows || shape[1] != stencil_cols)
    throw std::invalid_argument("stencil_mask: stencil does not match first two modes");
  if (static_cast<Index>(stencil.size()) != stencil_rows * stencil_cols)
    throw std::invalid_argument("stencil_mask: stencil size mismatch");
  ObservationMask m(shape, false);
  const Index plane = stencil_rows * stencil_cols;
  for (Index lin = 0; lin < m.size(); ++lin) {
    const Index p = lin % plane;
    const Index r = p % stencil_rows;
    const Index c = p / stencil_rows;
    m.set(lin, stencil[static_cast<std::size_t>(c * stencil_rows + r)] != 0);
  }
  m.recount();
  return m;
}

DenseTensor add_noise(const DenseTensor& x, double sigma2, std::uint64_t seed) {
  if (sigma2 < 0.0) throw std::invalid_argument("add_noise: sigma2 must be nonnegative");
  auto rng = make_rng(seed, 41);
  std::normal_distribution<double> g(0.0, std::sqrt(sigma2));
  Eigen::VectorXd v = x.values();
  if (sigma2 > 0.0)
    for (Index i = 0; i < v.size(); ++i) v[i] += g(rng);
  return DenseTensor(x.shape(), std::move(v));
}

double snr_to_sigma2(const DenseTensor& x, double snr_db) {
  const double n = static_cast<double>(x.size());
  return x.values().squaredNorm() / (n * std::pow(10.0, snr_db / 10.0));
}

SyntheticData gen_synthetic_tt(const SyntheticSpec& spec) {
  TTFormat tt(spec.shape, spec.ranks);
  auto rng = make_rng(spec.seed, 53);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t d = 0; d < tt.cores.size(); ++d) {
    TTCore& c = tt.cores[d];
    const Index p = c.r0 * c.r1;
    // Fiber covariance: Sigma_ij = exp(-|i-j|^2 / cov_scale) over the mode index.
    Eigen::MatrixXd sigma(c.n, c.n);
    for (Index i = 0; i < c.n; ++i)
      for (Index j = 0; j < c.n; ++j) {
        const double dist = static_cast<double>(i - j);
        sigma(i, j) = std::exp(-dist * dist / spec.cov_scale);
      }
    // Jittered Cholesky: the Gaussian kernel is numerically rank-deficient
    // for large n.
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      llt.compute(sigma + jitter * Eigen::MatrixXd::Identity(c.n, c.n));
      if (llt.info() == Eigen::Success) break;
      jitter = (jitter == 0.0) ? 1e-12 : jitter * 10.0;
    }
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("gen_synthetic_tt: covariance factorization failed");
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd g3(c.n, p);
    for (Index col = 0; col < p; ++col) {
      Eigen::VectorXd z(c.n);
      for (Index i = 0; i < c.n; ++i) z[i] = g(rng);
      g3.col(col) = chol * z;
    }
    c.set_unfold3(g3);
  }
  SyntheticData out;
  out.truth = tt_reconstruct(tt);
  out.cores = std::move(tt);
  return out;
}

TTFormat init_fill_ttsvd(const DenseTensor& y, const ObservationMask& o,
                         const std::vector<Index>& ranks, std::uint64_t seed) {
  if (y.shape() != o.shape()) throw std::invalid_argument("init_fill_ttsvd: shape mismatch");
  double sum = 0.0, sumsq = 0.0;
  Index count = 0;
  for (Index i = 0; i < y.size(); ++i)
    if (o.observed(i)) {
      sum += y.values()[i];
      sumsq += y.values()[i] * y.values()[i];
      ++count;
    }
  const double mean = (count > 0) ? sum / static_cast<double>(count) : 0.0;
  double var = (count > 1) ? (sumsq - sum * mean) / static_cast<double>(count - 1) : 1.0;
  if (var <= 0.0) var = 1.0;

  auto rng = make_rng(seed, 67);
  std::normal_distribution<double> g(mean, std::sqrt(var));
  Eigen::VectorXd filled = y.values();
  for (Index i = 0; i < y.size(); ++i)
    if (!o.observed(i)) filled[i] = g(rng);
  return tt_svd(DenseTensor(y.shape(), std::move(filled)), ranks);
}

std::vector<ModeObs> build_mode_observations(const DenseTensor& y, const ObservationMask& o) {
  if (y.shape() != o.shape())
    throw std::invalid_argument("build_mode_observations: shape mismatch");
  const Shape& shape = y.shape();
  const Index order = y.order();
  std::vector<ModeObs> obs(static_cast<std::size_t>(order));
  // prefix[d] = prod_{t<d} J_t; decomposes a linear index into the mode-d
  // matricization row and the left/right subchain column indices.
  std::vector<Index> prefix(static_cast<std::size_t>(order), 1);
  for (Index d = 1; d < order; ++d)
    prefix[static_cast<std::size_t>(d)] =
        prefix[static_cast<std::size_t>(d - 1)] * shape[static_cast<std::size_t>(d - 1)];

  for (Index lin = 0; lin < y.size(); ++lin) {
    if (!o.observed(lin)) continue;
    for (Index d = 0; d < order; ++d) {
      const Index pre = prefix[static_cast<std::size_t>(d)];
      const Index jd = shape[static_cast<std::size_t>(d)];
      ModeObs& m = obs[static_cast<std::size_t>(d)];
      m.col_left.push_back(lin % pre);
      m.row.push_back((lin / pre) % jd);
      m.col_right.push_back(lin / (pre * jd));
      m.y.push_back(y.values()[lin]);
    }
  }
  return obs;
}

}  // namespace graphtt
