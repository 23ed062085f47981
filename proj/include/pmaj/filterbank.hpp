#pragma once

#include <vector>

#include "pmaj/solvers.hpp"
#include "pmaj/types.hpp"

namespace pmaj {

// Orthonormal 2-D DCT-II basis of f x f kernels with the constant atom
// excluded: f^2 - 1 zero-mean atoms.
std::vector<Mat> dct_atoms(int f);

// K convolution filters parametrized by coefficients over the non-constant
// DCT-II atoms; synthesized kernels are zero-mean by construction.
struct FilterBank {
  int filters = 0;     // K
  int side = 0;        // f
  Mat coeff;           // K x (f^2 - 1)

  static FilterBank zeros(int filters, int side);
  std::vector<Mat> kernels() const;
};

// 2-D correlation with zero padding, same-size output.
Mat conv_apply(const Mat& kernel, const Mat& x);

// Exact adjoint of conv_apply.
Mat conv_adjoint(const Mat& kernel, const Mat& p);

// Gradient of <s, kernel (*) x> with respect to the kernel entries.
Mat kernel_gradient(const Mat& x, const Mat& s, int side);

std::vector<Mat> filterbank_apply(const FilterBank& bank, const Mat& x);
Mat filterbank_adjoint(const FilterBank& bank, const std::vector<Mat>& maps);

// The bank as a stacked LinearMap on flattened images (feature maps
// concatenated filter by filter). norm bound: sqrt(sum_k ||w_k||_1^2).
LinearMap filterbank_map(const FilterBank& bank, int h, int w);

// Forward-difference gradient operator (Neumann boundary) on an h x w image;
// output stacks the two difference directions. ||D||^2 <= 8.
LinearMap grad_map(int h, int w, double scale = 1.0);

inline Vec flatten(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unflatten(const Vec& v, int h, int w) {
  return Eigen::Map<const Mat>(v.data(), h, w);
}

}  // namespace pmaj
