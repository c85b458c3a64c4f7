#include "graphtt/tt.hpp"

#include <Eigen/SVD>

namespace graphtt {

Eigen::MatrixXd TTCore::unfold3() const {
  Eigen::MatrixXd g3(n, r0 * r1);
  for (Index j = 0; j < n; ++j)
    g3.row(j) = data.segment(j * r0 * r1, r0 * r1).transpose();
  return g3;
}

void TTCore::set_unfold3(const Eigen::MatrixXd& g3) {
  if (g3.rows() != n || g3.cols() != r0 * r1)
    throw std::invalid_argument("TTCore::set_unfold3: dimension mismatch");
  for (Index j = 0; j < n; ++j)
    data.segment(j * r0 * r1, r0 * r1) = g3.row(j).transpose();
}

TTFormat::TTFormat(const Shape& shape, const std::vector<Index>& ranks) {
  if (ranks.size() != shape.size() + 1)
    throw std::invalid_argument("TTFormat: ranks must have D+1 entries");
  if (ranks.front() != 1 || ranks.back() != 1)
    throw std::invalid_argument("TTFormat: boundary ranks must be 1");
  cores.reserve(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (ranks[d] < 1 || shape[d] < 1) throw std::invalid_argument("TTFormat: invalid rank or dim");
    cores.emplace_back(ranks[d], ranks[d + 1], shape[d]);
  }
}

Shape TTFormat::shape() const {
  Shape s(cores.size());
  for (std::size_t d = 0; d < cores.size(); ++d) s[d] = cores[d].n;
  return s;
}

std::vector<Index> TTFormat::ranks() const {
  std::vector<Index> r(cores.size() + 1, 1);
  for (std::size_t d = 0; d < cores.size(); ++d) r[d] = cores[d].r0;
  if (!cores.empty()) r[cores.size()] = cores.back().r1;
  return r;
}

void TTFormat::validate() const {
  if (cores.empty()) throw std::invalid_argument("TTFormat: no cores");
  if (cores.front().r0 != 1 || cores.back().r1 != 1)
    throw std::invalid_argument("TTFormat: boundary ranks must be 1");
  for (std::size_t d = 0; d + 1 < cores.size(); ++d)
    if (cores[d].r1 != cores[d + 1].r0)
      throw std::invalid_argument("TTFormat: rank chain mismatch");
}

double tt_entry(const TTFormat& tt, const std::vector<Index>& idx) {
  if (static_cast<Index>(idx.size()) != tt.order())
    throw std::invalid_argument("tt_entry: index arity mismatch");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (std::size_t d = 0; d < tt.cores.size(); ++d) {
    const TTCore& c = tt.cores[d];
    if (idx[d] < 0 || idx[d] >= c.n) throw std::out_of_range("tt_entry: index out of range");
    v = v * c.slice(idx[d]);
  }
  return v(0);
}

DenseTensor tt_reconstruct(const TTFormat& tt) {
  tt.validate();
  const Shape shape = tt.shape();
  // Chain the cores front to back, keeping a (prefix-count x R_{d+1}) matrix
  // whose rows enumerate (j_0..j_d) with j_0 fastest.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (const TTCore& c : tt.cores) {
    Eigen::MatrixXd next(acc.rows() * c.n, c.r1);
    for (Index j = 0; j < c.n; ++j)
      next.middleRows(j * acc.rows(), acc.rows()) = acc * c.slice(j);
    acc = std::move(next);
  }
  return DenseTensor(shape, Eigen::VectorXd(acc.col(0)));
}

SubchainPair subchains(const TTFormat& tt, Index mode) {
  tt.validate();
  const Index order = tt.order();
  if (mode < 0 || mode >= order) throw std::out_of_range("subchains: mode out of range");

  SubchainPair sc;
  sc.left = Eigen::MatrixXd::Ones(1, 1);
  for (Index t = 0; t < mode; ++t) {
    const TTCore& c = tt.cores[static_cast<std::size_t>(t)];
    Eigen::MatrixXd next(c.r1, sc.left.cols() * c.n);
    for (Index j = 0; j < c.n; ++j)
      next.middleCols(j * sc.left.cols(), sc.left.cols()) =
          c.slice(j).transpose() * sc.left;
    sc.left = std::move(next);
  }

  sc.right = Eigen::MatrixXd::Ones(1, 1);
  for (Index t = order - 1; t > mode; --t) {
    const TTCore& c = tt.cores[static_cast<std::size_t>(t)];
    Eigen::MatrixXd next(c.r0, c.n * sc.right.cols());
    for (Index rest = 0; rest < sc.right.cols(); ++rest)
      for (Index j = 0; j < c.n; ++j)
        next.col(rest * c.n + j) = c.slice(j) * sc.right.col(rest);
    sc.right = std::move(next);
  }
  return sc;
}

Eigen::MatrixXd subchain_kron(const SubchainPair& sc) {
  const Index rl = sc.left.rows(), cl = sc.left.cols();
  const Index rr = sc.right.rows(), cr = sc.right.cols();
  Eigen::MatrixXd k(rl * rr, cl * cr);
  for (Index a = 0; a < rr; ++a)
    for (Index b = 0; b < cr; ++b)
      k.block(a * rl, b * cl, rl, cl) = sc.right(a, b) * sc.left;
  return k;
}

TTFormat tt_svd(const DenseTensor& t, const std::vector<Index>& max_ranks) {
  const Shape shape = t.shape();
  const Index order = t.order();
  if (static_cast<Index>(max_ranks.size()) != order + 1)
    throw std::invalid_argument("tt_svd: max_ranks must have D+1 entries");
  if (max_ranks.front() != 1 || max_ranks.back() != 1)
    throw std::invalid_argument("tt_svd: boundary rank bounds must be 1");
  for (Index r : max_ranks)
    if (r < 1) throw std::invalid_argument("tt_svd: rank bounds must be positive");

  TTFormat tt;
  Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(
      t.values().data(), shape[0], t.size() / shape[0]);
  Index r_prev = 1;
  for (Index d = 0; d < order; ++d) {
    const Index jd = shape[static_cast<std::size_t>(d)];
    if (d == order - 1) {
      // Last core absorbs the remaining matrix (r_prev x J_{D-1}).
      TTCore core(r_prev, 1, jd);
      for (Index j = 0; j < jd; ++j) core.slice(j) = c.col(j);
      tt.cores.push_back(std::move(core));
      break;
    }
    Eigen::Map<const Eigen::MatrixXd> m(c.data(), r_prev * jd, c.size() / (r_prev * jd));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index r_next =
        std::min<Index>(max_ranks[static_cast<std::size_t>(d) + 1],
                        std::min<Index>(m.rows(), m.cols()));
    Eigen::MatrixXd u = svd.matrixU().leftCols(r_next);
    TTCore core(r_prev, r_next, jd);
    for (Index j = 0; j < jd; ++j)
      core.slice(j) = u.middleRows(j * r_prev, r_prev);
    tt.cores.push_back(std::move(core));
    c = svd.singularValues().head(r_next).asDiagonal() *
        svd.matrixV().leftCols(r_next).transpose();
    r_prev = r_next;
  }
  return tt;
}

Index tt_param_count(const Shape& shape, const std::vector<Index>& ranks) {
  if (ranks.size() != shape.size() + 1)
    throw std::invalid_argument("tt_param_count: ranks must have D+1 entries");
  Index total = 0;
  for (std::size_t d = 0; d < shape.size(); ++d)
    total += shape[d] * ranks[d] * ranks[d + 1];
  return total;
}

}  // namespace graphtt
