#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "graphtt/io.hpp"
#include "graphtt/tensor.hpp"
#include "graphtt/tt.hpp"

using namespace graphtt;

namespace {

DenseTensor random_tensor(const Shape& shape, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = g(rng);
  return DenseTensor(shape, std::move(v));
}

TTFormat random_tt(const Shape& shape, const std::vector<Index>& ranks, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  TTFormat tt(shape, ranks);
  for (TTCore& c : tt.cores)
    for (Index i = 0; i < c.data.size(); ++i) c.data[i] = g(rng);
  return tt;
}

}  // namespace

TEST_CASE("DenseTensor indexing: first index fastest") {
  DenseTensor t(Shape{2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.linear_index({0, 0, 0}) == 0);
  CHECK(t.linear_index({1, 0, 0}) == 1);
  CHECK(t.linear_index({0, 1, 0}) == 2);
  CHECK(t.linear_index({0, 0, 1}) == 6);
  CHECK(t.linear_index({1, 2, 3}) == 1 + 2 * 2 + 3 * 6);
  CHECK_THROWS(t.linear_index({2, 0, 0}));
  CHECK_THROWS(DenseTensor(Shape{2, 0}));
}

TEST_CASE("matricize/tensorize round trip and column bijection") {
  const Shape shape{3, 4, 2, 5};
  const DenseTensor t = random_tensor(shape, 1);
  for (Index mode = 0; mode < 4; ++mode) {
    const Eigen::MatrixXd m = matricize(t, mode);
    CHECK(m.rows() == shape[static_cast<std::size_t>(mode)]);
    CHECK(m.cols() == t.size() / shape[static_cast<std::size_t>(mode)]);
    // Every entry lands at (idx[mode], matricize_col(idx)).
    std::vector<Index> idx(4, 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
      const Index col = matricize_col(shape, mode, idx);
      CHECK(m(idx[static_cast<std::size_t>(mode)], col) == t[lin]);
      next_multi_index(idx, shape);
    }
    const DenseTensor back = tensorize(m, mode, shape);
    CHECK((back.values() - t.values()).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("tt_entry equals slice-product definition and tt_reconstruct agrees") {
  const Shape shape{3, 4, 2};
  const std::vector<Index> ranks{1, 2, 3, 1};
  const TTFormat tt = random_tt(shape, ranks, 7);
  const DenseTensor full = tt_reconstruct(tt);
  std::vector<Index> idx(3, 0);
  for (Index lin = 0; lin < full.size(); ++lin) {
    // Direct matrix chain.
    Eigen::MatrixXd prod = tt.cores[0].slice(idx[0]);
    prod = prod * tt.cores[1].slice(idx[1]);
    prod = prod * tt.cores[2].slice(idx[2]);
    CHECK(tt_entry(tt, idx) == doctest::Approx(prod(0, 0)).epsilon(1e-12));
    CHECK(full[lin] == doctest::Approx(prod(0, 0)).epsilon(1e-12));
    next_multi_index(idx, shape);
  }
}

TEST_CASE("subchains satisfy the matricization identity") {
  const Shape shape{3, 4, 2, 3};
  const std::vector<Index> ranks{1, 2, 3, 2, 1};
  const TTFormat tt = random_tt(shape, ranks, 11);
  const DenseTensor full = tt_reconstruct(tt);
  for (Index mode = 0; mode < 4; ++mode) {
    const SubchainPair sc = subchains(tt, mode);
    const Eigen::MatrixXd lhs = matricize(full, mode);
    const Eigen::MatrixXd rhs =
        tt.cores[static_cast<std::size_t>(mode)].unfold3() * subchain_kron(sc);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("subchain_kron row bijection p = l*R_d + k") {
  const Shape shape{2, 3, 2};
  const std::vector<Index> ranks{1, 2, 2, 1};
  const TTFormat tt = random_tt(shape, ranks, 13);
  const SubchainPair sc = subchains(tt, 1);
  const Eigen::MatrixXd k = subchain_kron(sc);
  for (Index l = 0; l < 2; ++l)
    for (Index kk = 0; kk < 2; ++kk)
      for (Index cl = 0; cl < sc.left.cols(); ++cl)
        for (Index cr = 0; cr < sc.right.cols(); ++cr)
          CHECK(k(l * 2 + kk, cr * sc.left.cols() + cl) ==
                doctest::Approx(sc.left(kk, cl) * sc.right(l, cr)).epsilon(1e-12));
}

TEST_CASE("tt_svd recovers TT data exactly at true ranks") {
  const Shape shape{5, 6, 4, 3};
  const std::vector<Index> ranks{1, 3, 4, 2, 1};
  const TTFormat tt = random_tt(shape, ranks, 17);
  const DenseTensor full = tt_reconstruct(tt);
  const TTFormat fit = tt_svd(full, ranks);
  const DenseTensor back = tt_reconstruct(fit);
  CHECK((back.values() - full.values()).norm() / full.values().norm() < 1e-10);
  CHECK(fit.ranks() == ranks);
}

TEST_CASE("tt_svd truncation caps ranks by the matricization bounds") {
  const DenseTensor t = random_tensor({4, 5, 3}, 19);
  const TTFormat fit = tt_svd(t, {1, 100, 100, 1});
  const auto r = fit.ranks();
  CHECK(r[1] == 4);       // min(4, 15)
  CHECK(r[2] == 3);       // min(4*5, 3)
  const DenseTensor back = tt_reconstruct(fit);  // full-rank: exact
  CHECK((back.values() - t.values()).norm() / t.values().norm() < 1e-10);
}

TEST_CASE("tt_param_count arithmetic") {
  CHECK(tt_param_count({2, 2}, {1, 1, 1}) == 4);
  CHECK(tt_param_count({256, 256, 3, 32}, {1, 16, 16, 16, 1}) == 70912);
  CHECK_THROWS(tt_param_count({2, 2}, {1, 1}));
}

TEST_CASE("GTT1 and GTTC file round trips") {
  const DenseTensor t = random_tensor({3, 4, 2}, 23);
  const std::string tpath = "test_roundtrip.gtt";
  save_tensor(tpath, t);
  const DenseTensor back = load_tensor(tpath);
  CHECK(back.shape() == t.shape());
  CHECK((back.values() - t.values()).norm() == 0.0);
  std::remove(tpath.c_str());

  const TTFormat tt = random_tt({3, 4, 2}, {1, 2, 3, 1}, 29);
  const std::string cpath = "test_roundtrip.gttc";
  save_tt(cpath, tt);
  const TTFormat tback = load_tt(cpath);
  CHECK(tback.ranks() == tt.ranks());
  CHECK(tback.shape() == tt.shape());
  for (std::size_t d = 0; d < tt.cores.size(); ++d)
    CHECK((tback.cores[d].data - tt.cores[d].data).norm() == 0.0);
  std::remove(cpath.c_str());

  CHECK_THROWS(load_tensor("does_not_exist.gtt"));
}
