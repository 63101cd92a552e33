#pragma once

#include <Eigen/Dense>

namespace lmc {

// State and jump vectors never exceed three components, so the storage is
// inline and the hot loops never touch the heap.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Joint (x, y) vectors and matrices on R^{2d}.
using Vec2d = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;
using Mat2d = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim, 2 * kMaxDim>;

inline Vec zeros(int dim) { return Vec::Zero(dim); }

inline double hs_norm(const Mat& m) { return m.norm(); }

}  // namespace lmc
