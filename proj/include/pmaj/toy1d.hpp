#pragma once

#include <vector>

#include "pmaj/types.hpp"

namespace pmaj {

// One-dimensional sparsity bi-level problem
//   min_theta 1/2 |x* - x(theta)|^2
//   s.t.      x(theta) = argmin_x 1/2 |x - y|^2 + theta |x|
// with closed forms for the lower level, the loss and all surrogates. Serves
// as the reference oracle for the generic surrogate machinery.

struct ToyInstance {
  double xstar = 0.3;
  double y = 1.5;
};

// Soft threshold sign(y) max(|y| - theta, 0); theta >= 0.
double toy_lower_level(double y, double theta);

double toy_loss(const ToyInstance& inst, double theta);

struct ToySurrogates {
  double loss = 0.0;
  double bregman = 0.0;            // exact, all constants kept
  double partial = 0.0;            // E2-side
  double gradient_penalty = 0.0;
};

ToySurrogates toy_surrogates_closed_form(const ToyInstance& inst, double theta);

struct ToyRow {
  double theta;
  ToySurrogates s;
};

std::vector<ToyRow> toy_sweep(const ToyInstance& inst,
                              const std::vector<double>& grid);

struct CollapseRow {
  double theta;
  double naive;          // sum (theta^2 x* - theta y)^2, zero at theta = 0
  double reformulated;   // sum (x* - y/theta)^2
};

std::vector<CollapseRow> collapse_sweep(
    const std::vector<std::pair<double, double>>& samples,
    const std::vector<double>& grid);

}  // namespace pmaj
