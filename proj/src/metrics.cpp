#include "graphtt/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphtt {

namespace {

void check_same_shape(const DenseTensor& a, const DenseTensor& b, const char* who) {
  if (a.shape() != b.shape()) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

double rse(const DenseTensor& truth, const DenseTensor& estimate) {
  check_same_shape(truth, estimate, "rse");
  const double denom = truth.frobenius_norm();
  if (denom == 0.0) throw std::invalid_argument("rse: reference tensor is zero");
  return (truth.values() - estimate.values()).norm() / denom;
}

double psnr(const DenseTensor& truth, const DenseTensor& estimate) {
  check_same_shape(truth, estimate, "psnr");
  const double mse =
      (truth.values() - estimate.values()).squaredNorm() / static_cast<double>(truth.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = truth.values().maxCoeff();
  return 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
}

double ssim(const DenseTensor& truth, const DenseTensor& estimate) {
  check_same_shape(truth, estimate, "ssim");
  if (truth.order() < 2) throw std::invalid_argument("ssim: need at least 2 modes");
  const Index h = truth.dim(0), w = truth.dim(1);
  constexpr Index kWin = 11;
  if (h < kWin || w < kWin) throw std::invalid_argument("ssim: image smaller than 11x11 window");

  // 11x11 Gaussian window, sigma = 1.5, normalized to unit sum.
  Eigen::VectorXd g(kWin);
  for (Index i = 0; i < kWin; ++i) {
    const double d = static_cast<double>(i - kWin / 2);
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
  }
  Eigen::MatrixXd win = g * g.transpose();
  win /= win.sum();

  constexpr double kL = 1.0;
  constexpr double c1 = (0.01 * kL) * (0.01 * kL);
  constexpr double c2 = (0.03 * kL) * (0.03 * kL);

  const Index planes = truth.size() / (h * w);
  double total = 0.0;
  Index windows = 0;
  for (Index p = 0; p < planes; ++p) {
    Eigen::Map<const Eigen::MatrixXd> x(truth.values().data() + p * h * w, h, w);
    Eigen::Map<const Eigen::MatrixXd> y(estimate.values().data() + p * h * w, h, w);
    for (Index c0 = 0; c0 + kWin <= w; ++c0)
      for (Index r0 = 0; r0 + kWin <= h; ++r0) {
        const auto bx = x.block(r0, c0, kWin, kWin).array();
        const auto by = y.block(r0, c0, kWin, kWin).array();
        const auto wa = win.array();
        const double mx = (wa * bx).sum();
        const double my = (wa * by).sum();
        const double vx = (wa * bx * bx).sum() - mx * mx;
        const double vy = (wa * by * by).sum() - my * my;
        const double cxy = (wa * bx * by).sum() - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++windows;
      }
  }
  return total / static_cast<double>(windows);
}

NormalizedTensor normalize_unit(const DenseTensor& x) {
  const double lo = x.values().minCoeff();
  const double hi = x.values().maxCoeff();
  if (hi <= lo) throw std::invalid_argument("normalize_unit: constant tensor");
  NormalizedTensor out;
  out.record = {lo, hi - lo};
  out.tensor = DenseTensor(x.shape(), Eigen::VectorXd((x.values().array() - lo) / (hi - lo)));
  return out;
}

DenseTensor denormalize_unit(const DenseTensor& x, const UnitScale& record) {
  return DenseTensor(x.shape(),
                     Eigen::VectorXd(x.values().array() * record.scale + record.offset));
}

}  // namespace graphtt
