#pragma once

#include <functional>
#include <stdexcept>

#include "pmaj/types.hpp"

namespace pmaj {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int max_iter = 2000;
  double tol = 1e-8;          // relative residual
  double backtrack = 2.0;     // Lipschitz growth factor
  bool accelerate = true;
};

// Composite problem min_x f(x) + g(x) with f smooth and g prox-capable.
struct ProxGradProblem {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad_f;
  std::function<double(const Vec&)> g_value;          // may be null (treated as 0)
  std::function<Vec(const Vec&, double)> prox_g;      // prox_{tau g}
  double lipschitz = 1.0;                             // initial estimate
  Vec x0;
};

struct ProxGradResult {
  Vec x;
  double residual = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// FISTA with backtracking on the descent inequality. With accelerate=false the
// objective is monotone.
ProxGradResult prox_gradient(const ProxGradProblem& problem,
                             const SolverConfig& config = {});

struct LinearMap {
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> adjoint;
  double norm_bound = 1.0;   // upper bound on the operator norm
  int in_dim = 0;
  int out_dim = 0;
};

// min_x G(x) + F(K x) written as a saddle problem
//   min_x max_p <Kx, p> - F*(p) + G(x).
// primal_step(xbar, kty, tau) returns
//   argmin_x G(x) + <kty, x> + (1/tau) dist(x, xbar)
// where dist is 1/2||.||^2 (euclidean) or the entropy Bregman distance.
struct SaddleProblem {
  LinearMap k;
  std::function<Vec(const Vec&, double)> dual_prox;   // prox_{sigma F*}
  std::function<Vec(const Vec&, const Vec&, double)> primal_step;
  double gamma = 0.0;        // strong convexity of G (euclidean acceleration)
  Vec x0;
  Vec p0;
};

struct SaddleResult {
  Vec x;
  Vec p;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Accelerated primal-dual iteration; steps chosen with tau*sigma*||K||^2 <= 1.
SaddleResult primal_dual(const SaddleProblem& problem,
                         const SolverConfig& config = {});

// Inner-product adjoint test on random vectors; throws on failure.
void check_adjoint(const LinearMap& k, unsigned seed = 7, int trials = 5,
                   double tol = 1e-8);

struct AdamConfig {
  int max_iter = 500;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double stop_tol = 0.0;     // stop when the step norm falls below this
};

// Projected adaptive-moment descent with bias correction. project may be null.
Vec adaptive_moment_descent(
    const std::function<double(const Vec&, Vec&)>& value_and_grad, Vec theta,
    double tau, const std::function<void(Vec&)>& project,
    const AdamConfig& config = {});

struct GridResult {
  double best_arg = 0.0;
  double best_value = 0.0;
};

// Exhaustive search on [lo,hi] with `points` samples, recursively refined
// `refine_levels` times around the incumbent.
GridResult grid_search(const std::function<double(double)>& objective,
                       double lo, double hi, int points, int refine_levels);

}  // namespace pmaj
