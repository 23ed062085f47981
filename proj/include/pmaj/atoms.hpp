#pragma once

#include <optional>
#include <string>

#include "pmaj/types.hpp"

namespace pmaj {

// Numerically stable log-sum-exp h*(p) of the entropy-on-simplex function.
double log_sum_exp(const Vec& p);

// Gradient of log_sum_exp; output lies on the unit simplex.
Vec softmax(const Vec& p);

// argmin_x <g,x> + (1/tau) D_h(x, xbar) over the simplex, i.e. the
// multiplicative update normalize(xbar .* exp(-tau g)). Stabilized by
// max-subtraction in the exponent.
Vec entropy_bregman_prox(const Vec& xbar, const Vec& g, double tau);

enum class AtomKind { Quadratic, WeightedL1, Linear, EntropySimplex, Zero };

// A convex energy building block with evaluation, a canonical subgradient,
// convex conjugate, proximal map and Bregman distances.
//
// Kinds:
//   Quadratic       1/2 ||x - y||^2
//   WeightedL1      w ||A x||_1   (A optional; identity when absent)
//   Linear          <c, x>
//   EntropySimplex  sum_j x_j log x_j + indicator of the unit simplex
//   Zero            0
class EnergyAtom {
 public:
  static EnergyAtom quadratic(Vec y);
  static EnergyAtom weighted_l1(double weight, int dim);
  static EnergyAtom weighted_l1(double weight, Mat a);
  static EnergyAtom linear(Vec c);
  static EnergyAtom entropy_simplex(int dim);
  static EnergyAtom zero(int dim);

  AtomKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double weight() const { return weight_; }
  const Vec& data() const { return data_; }

  // Strong-convexity modulus m: D(x,z) >= (m/2)||x-z||^2.
  double modulus() const;

  double eval(const Vec& x) const;

  // Canonical subgradient; at kinks of ||.||_1 the minimal-norm element 0 is
  // selected.
  Vec subgradient(const Vec& x) const;

  // Convex conjugate E*(p) = sup_x <p,x> - E(x). Returns +inf for p outside
  // the domain of indicator-type conjugates.
  double conjugate(const Vec& p) const;

  // True when the conjugate is differentiable on its (full) domain.
  bool conjugate_smooth() const;
  Vec conjugate_grad(const Vec& p) const;

  // Projection onto the domain of the conjugate (identity when the conjugate
  // is finite everywhere).
  Vec conjugate_domain_project(const Vec& p) const;

  // argmin_x 1/2||x - xbar||^2 + tau * atom(x), tau > 0.
  Vec prox(const Vec& xbar, double tau) const;

  // D_E^p(x,z) = E(x) - E(z) - <p, x-z> with p in dE(z); p is validated
  // against the subgradient tolerance.
  double bregman(const Vec& x, const Vec& z, const Vec& p) const;

  // W_E(p,x) = E*(p) + E(x) - <p,x>; nonnegative, zero iff p in dE(x).
  double w_gap(const Vec& p, const Vec& x) const;

 private:
  EnergyAtom(AtomKind kind, int dim) : kind_(kind), dim_(dim) {}

  AtomKind kind_;
  int dim_;
  double weight_ = 0.0;          // WeightedL1
  Vec data_;                     // Quadratic y / Linear c
  std::optional<Mat> map_;       // WeightedL1 linear map
};

// E(x, y, theta) = e1(x) + e2(x); the additive split the dual surrogates
// exploit.
struct SplitEnergy {
  EnergyAtom e1;
  EnergyAtom e2;

  int dim() const { return e1.dim(); }
  double modulus() const { return e1.modulus() + e2.modulus(); }
  double eval(const Vec& x) const { return e1.eval(x) + e2.eval(x); }
  Vec subgradient(const Vec& x) const {
    return e1.subgradient(x) + e2.subgradient(x);
  }
};

double eval_energy(const SplitEnergy& e, const Vec& x);

// Loss generators l(x,z) = D_w(x,z) for w quadratic or entropy-on-simplex.
class BregmanGenerator {
 public:
  enum class Kind { Quadratic, EntropySimplex };

  static BregmanGenerator quadratic() { return BregmanGenerator(Kind::Quadratic); }
  static BregmanGenerator entropy() { return BregmanGenerator(Kind::EntropySimplex); }

  Kind kind() const { return kind_; }

  double value(const Vec& x, const Vec& z) const;

  // Gradient of l(x, .) in the second argument.
  Vec grad_second(const Vec& x, const Vec& z) const;

 private:
  explicit BregmanGenerator(Kind k) : kind_(k) {}
  Kind kind_;
};

}  // namespace pmaj
