#pragma once

#include "graphtt/tensor.hpp"

namespace graphtt {

/// Relative squared error ||X - Xhat||_F / ||X||_F.
double rse(const DenseTensor& truth, const DenseTensor& estimate);

/// Peak signal-to-noise ratio in dB:
///   20 log10(max(X)) - 10 log10(MSE).
/// Returns +infinity when the tensors are identical.
double psnr(const DenseTensor& truth, const DenseTensor& estimate);

/// Mean structural similarity over the first two modes, averaged across the
/// remaining modes. 11x11 Gaussian window (sigma = 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range L = 1, valid-region convolution (no padding).
double ssim(const DenseTensor& truth, const DenseTensor& estimate);

/// Affinely rescales values to [0, 1], recording the map for inversion.
/// Throws for constant tensors (the map would be ill-defined).
struct UnitScale {
  double offset = 0.0;  // original minimum
  double scale = 1.0;   // original max - min
};
struct NormalizedTensor {
  DenseTensor tensor;
  UnitScale record;
};
NormalizedTensor normalize_unit(const DenseTensor& x);
DenseTensor denormalize_unit(const DenseTensor& x, const UnitScale& record);

}  // namespace graphtt
