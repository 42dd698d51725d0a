#pragma once

#include <unsupported/Eigen/AutoDiff>

namespace capillary {

// Forward-mode scalars used to differentiate the discrete energy exactly.
using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;
template <int N>
using DualN = Eigen::AutoDiffScalar<Eigen::Matrix<double, N, 1>>;

inline double toDouble(double x) { return x; }
template <class D>
double toDouble(const Eigen::AutoDiffScalar<D>& x) {
  return x.value();
}

}  // namespace capillary
