#pragma once

#include <string>

#include "graphtt/tensor.hpp"
#include "graphtt/tt.hpp"

namespace graphtt {

/// GTT1 dense tensor container: magic "GTT1", u32 order D, D u32 dims,
/// then shape_size little-endian f64 values with the first index fastest.
void save_tensor(const std::string& path, const DenseTensor& t);
DenseTensor load_tensor(const std::string& path);

/// GTTC TT container: magic "GTTC", u32 order D, D+1 u32 ranks, D u32 dims,
/// then the cores in order; each core is r_d * r_{d+1} * J_d little-endian
/// f64 values with r_d fastest, then r_{d+1}, then j_d.
void save_tt(const std::string& path, const TTFormat& tt);
TTFormat load_tt(const std::string& path);

}  // namespace graphtt
