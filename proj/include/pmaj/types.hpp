#pragma once

#include <Eigen/Dense>
#include <limits>

namespace pmaj {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual tolerances are absolute for unit-scale problems and scaled by
// max(1, ||x||_inf) otherwise.
inline constexpr double kResidualTol = 1e-8;

inline double scale_of(const Vec& x) {
  return x.size() == 0 ? 1.0 : std::max(1.0, x.cwiseAbs().maxCoeff());
}

}  // namespace pmaj
