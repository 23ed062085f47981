#pragma once

#include <functional>
#include <vector>

#include "pmaj/atoms.hpp"
#include "pmaj/solvers.hpp"

namespace pmaj {

enum class SurrogateKind {
  BregmanDual,
  BregmanPrimal,
  PartialE1,
  PartialE2,
  GradientPenalty,
  Iterative,
};

enum class PartialSide { E1, E2 };

struct SurrogateResult {
  double value = 0.0;
  Vec inner;          // attaining inner variable z* (empty when none)
  double residual = 0.0;
};

// min_z E1*(g - z) + E2*(z); the split evaluation of E*(g). Requires a smooth
// conjugate on one side and a projectable conjugate domain (or a smooth
// conjugate) on the other. z0 seeds a warm start.
SurrogateResult inner_conjugate_min(const SplitEnergy& e, const Vec& g,
                                    const SolverConfig& config = {},
                                    const Vec* z0 = nullptr);

// Dual form E(x*) + min_z E1*(-z) + E2*(z), all constants kept so that a zero
// value certifies a zero higher-level loss.
SurrogateResult bregman_surrogate_dual(const SplitEnergy& e, const Vec& xstar,
                                       const SolverConfig& config = {});

// Primal form E(x*) - min_x E(x); agrees with the dual form at the solver
// tolerance.
double bregman_surrogate_primal(const SplitEnergy& e, const Vec& xstar,
                                const SolverConfig& config = {});

// W_{E1}(-z, x*) with z the canonical subgradient of E2 at x* (side E2), or
// symmetrically. +inf when z is infeasible for the frozen conjugate.
double partial_surrogate(const SplitEnergy& e, const Vec& xstar,
                         PartialSide side);

// (1/(2m)) ||q||^2 for the canonical q in dE(x*); requires modulus m > 0.
double gradient_penalty(const SplitEnergy& e, const Vec& xstar);

// E(xbar) + E*(grad l(x*, xbar)) + l(x*, xbar) - <grad l(x*, xbar), xbar>.
// Reduces to the dual Bregman surrogate at xbar = x*.
SurrogateResult iterative_surrogate(const SplitEnergy& e,
                                    const BregmanGenerator& loss,
                                    const Vec& xstar, const Vec& xbar,
                                    const SolverConfig& config = {},
                                    const Vec* z0 = nullptr);

// ---------------------------------------------------------------------------
// Trainable family: E(x, y, theta) = 1/2 ||x - y||^2 + theta ||x||_1 with a
// scalar parameter theta >= 0. The dual variable is parametrized as
// z = theta * u with ||u||_inf <= 1 so the feasible set does not move with
// theta and joint projected steps apply.

struct Sample {
  Vec xstar;
  Vec y;
};

struct SurrogateProblem {
  std::vector<Sample> samples;
  BregmanGenerator loss = BregmanGenerator::quadratic();
  SurrogateKind kind = SurrogateKind::BregmanDual;
};

SplitEnergy quadl1_energy(double theta, const Vec& y);

struct BatchEval {
  double value = 0.0;
  double dtheta = 0.0;
  std::vector<Vec> dinner;   // gradients w.r.t. the scaled duals u_i
};

// Joint surrogate objective and analytic gradient over (theta, {u_i}).
// anchors are the linearization points (x*_i for the non-iterative kinds).
BatchEval surrogate_batch_objective(const SurrogateProblem& problem,
                                    double theta,
                                    const std::vector<Vec>& inner,
                                    const std::vector<Vec>& anchors);

struct IterativeConfig {
  int max_outer = 30;
  int rejection_budget = 3;       // consecutive rejected steps before stop
  double tau0 = 0.1;              // surrogate-solver (Adam) step size
  int surrogate_steps = 3000;     // Adam iterations per outer step
  double lower_tol = 1e-10;       // lower-level solver residual
  double loss_tol = 1e-14;        // early stop on the higher-level loss
};

struct IterRecord {
  int iteration = 0;
  double tau = 0.0;
  double surrogate_value = 0.0;
  double loss = 0.0;
};

struct IterationState {
  Vec theta;
  std::vector<Vec> anchors;
  std::vector<double> loss_trace;   // non-increasing, guard enforced
  double tau = 0.0;
  int reductions = 0;
  std::vector<IterRecord> records;
};

// Callbacks for one concrete bi-level model driven by the guarded scheme.
struct IterativeModel {
  // Minimize the surrogate built on `anchors` in theta, starting at theta,
  // with solver step tau; returns the new theta and the surrogate value.
  std::function<std::pair<Vec, double>(const Vec& theta,
                                       const std::vector<Vec>& anchors,
                                       double tau, int steps)>
      minimize_surrogate;
  // Lower-level solutions x_i(theta) at the configured residual tolerance.
  std::function<std::vector<Vec>(const Vec& theta)> solve_lower;
  // Higher-level loss sum_i l(x*_i, x_i).
  std::function<double(const std::vector<Vec>& xs)> loss;
};

// Guarded majorization-minimization: anchors start at x*_i, every accepted
// step keeps the true loss non-increasing, rejected steps halve tau.
IterationState iterative_train(const IterativeModel& model, Vec theta0,
                               const IterativeConfig& config = {});

// The scalar quadratic+L1 family as an IterativeModel.
IterativeModel quadl1_model(const SurrogateProblem& problem);

IterationState iterative_train(const SurrogateProblem& problem, double theta0,
                               const IterativeConfig& config = {});

}  // namespace pmaj
