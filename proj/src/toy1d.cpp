#include "pmaj/toy1d.hpp"

#include <cmath>
#include <stdexcept>

namespace pmaj {

double toy_lower_level(double y, double theta) {
  if (theta < 0.0) throw std::invalid_argument("toy_lower_level: theta < 0");
  const double m = std::max(std::abs(y) - theta, 0.0);
  return y >= 0.0 ? m : -m;
}

double toy_loss(const ToyInstance& inst, double theta) {
  const double d = inst.xstar - toy_lower_level(inst.y, theta);
  return 0.5 * d * d;
}

ToySurrogates toy_surrogates_closed_form(const ToyInstance& inst,
                                         double theta) {
  if (theta < 0.0) throw std::invalid_argument("toy surrogates: theta < 0");
  const double xs = inst.xstar;
  const double y = inst.y;
  ToySurrogates s;
  s.loss = toy_loss(inst, theta);

  // Exact dual Bregman value E(x*) + E*(0); E*(0) = -min_x E. The published
  // dual form drops the constant -y^2/2, which is restored here so that the
  // value vanishes exactly when the loss does.
  const double e_xstar = 0.5 * (xs - y) * (xs - y) + theta * std::abs(xs);
  const double min_e = theta <= std::abs(y)
                           ? theta * std::abs(y) - 0.5 * theta * theta
                           : 0.5 * y * y;
  s.bregman = e_xstar - min_e;

  // E2-side partial surrogate; coincides with the gradient penalty because E1
  // is quadratic with modulus 1.
  const double sgn = xs > 0.0 ? 1.0 : (xs < 0.0 ? -1.0 : 0.0);
  const double q = xs - y + theta * sgn;
  s.partial = 0.5 * q * q;
  s.gradient_penalty = s.partial;
  return s;
}

std::vector<ToyRow> toy_sweep(const ToyInstance& inst,
                              const std::vector<double>& grid) {
  std::vector<ToyRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) rows.push_back({t, toy_surrogates_closed_form(inst, t)});
  return rows;
}

std::vector<CollapseRow> collapse_sweep(
    const std::vector<std::pair<double, double>>& samples,
    const std::vector<double>& grid) {
  std::vector<CollapseRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    CollapseRow r{t, 0.0, 0.0};
    for (const auto& [xs, y] : samples) {
      const double n = t * t * xs - t * y;
      r.naive += n * n;
      if (t != 0.0) {
        const double d = xs - y / t;
        r.reformulated += d * d;
      } else {
        r.reformulated = kInf;
      }
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pmaj
