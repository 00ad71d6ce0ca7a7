#pragma once

#include <Eigen/Dense>

namespace homog {

/// Observables take values in R^d with d <= kMaxDim.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

}  // namespace homog
