#include "pmaj/solvers.hpp"

#include <cmath>
#include <random>

namespace pmaj {

ProxGradResult prox_gradient(const ProxGradProblem& problem,
                             const SolverConfig& config) {
  if (!problem.f || !problem.grad_f || !problem.prox_g) {
    throw std::invalid_argument("prox_gradient: incomplete problem");
  }
  auto gval = [&](const Vec& x) {
    return problem.g_value ? problem.g_value(x) : 0.0;
  };

  double lip = std::max(problem.lipschitz, 1e-12);
  Vec x = problem.x0;
  Vec y = x;
  double t = 1.0;
  double fy, last_obj = problem.f(x) + gval(x);
  int bad_steps = 0;

  ProxGradResult out;
  for (int it = 0; it < config.max_iter; ++it) {
    Vec grad = problem.grad_f(y);
    fy = problem.f(y);
    Vec xn;
    // backtracking on the descent inequality
    for (;;) {
      xn = problem.prox_g(y - grad / lip, 1.0 / lip);
      Vec d = xn - y;
      double quad = fy + grad.dot(d) + 0.5 * lip * d.squaredNorm();
      if (problem.f(xn) <= quad + 1e-12 * std::max(1.0, std::abs(quad))) break;
      lip *= config.backtrack;
      if (lip > 1e18) throw SolverError("prox_gradient: backtracking diverged");
    }

    const double res = lip * (xn - y).norm() / scale_of(xn);
    if (config.accelerate) {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
      x = xn;
    } else {
      x = xn;
      y = xn;
      const double obj = problem.f(x) + gval(x);
      if (obj > last_obj + 1e-9 * std::max(1.0, std::abs(last_obj))) {
        if (++bad_steps > 10) throw SolverError("prox_gradient: objective increases");
      } else {
        bad_steps = 0;
      }
      last_obj = obj;
    }
    out.iterations = it + 1;
    if (res <= config.tol) {
      out.converged = true;
      out.residual = res;
      break;
    }
    out.residual = res;
  }
  out.x = x;
  out.objective = problem.f(x) + gval(x);
  return out;
}

SaddleResult primal_dual(const SaddleProblem& problem,
                         const SolverConfig& config) {
  const double L = std::max(problem.k.norm_bound, 1e-12);
  double tau = 1.0 / L;
  double sigma = 1.0 / L;
  if (tau * sigma * L * L > 1.0 + 1e-12) {
    throw std::invalid_argument("primal_dual: step-size product violated");
  }

  Vec x = problem.x0;
  Vec p = problem.p0;
  Vec xt = x;
  double theta = 1.0;

  SaddleResult out;
  for (int it = 0; it < config.max_iter; ++it) {
    Vec pn = problem.dual_prox(p + sigma * problem.k.apply(xt), sigma);
    Vec xn = problem.primal_step(x, problem.k.adjoint(pn), tau);
    if (problem.gamma > 0.0 && config.accelerate) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * problem.gamma * tau);
      tau *= theta;
      sigma /= theta;
    }
    const double res = ((xn - x).norm() / tau + (pn - p).norm() / sigma) /
                       (scale_of(xn) + scale_of(pn));
    xt = xn + theta * (xn - x);
    x = xn;
    p = pn;
    out.iterations = it + 1;
    out.residual = res;
    if (res <= config.tol) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.p = p;
  return out;
}

void check_adjoint(const LinearMap& k, unsigned seed, int trials, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Vec x(k.in_dim), p(k.out_dim);
    for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
    for (int i = 0; i < p.size(); ++i) p[i] = u(rng);
    const double a = k.apply(x).dot(p);
    const double b = x.dot(k.adjoint(p));
    if (std::abs(a - b) > tol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
      throw std::invalid_argument("linear map fails the adjoint test");
    }
  }
}

Vec adaptive_moment_descent(
    const std::function<double(const Vec&, Vec&)>& value_and_grad, Vec theta,
    double tau, const std::function<void(Vec&)>& project,
    const AdamConfig& config) {
  Vec m = Vec::Zero(theta.size());
  Vec v = Vec::Zero(theta.size());
  Vec grad(theta.size());
  for (int it = 1; it <= config.max_iter; ++it) {
    value_and_grad(theta, grad);
    if (!grad.allFinite()) {
      throw SolverError("adaptive_moment_descent: non-finite gradient");
    }
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v.array() + (1.0 - config.beta2) * grad.array().square();
    const double bc1 = 1.0 - std::pow(config.beta1, it);
    const double bc2 = 1.0 - std::pow(config.beta2, it);
    Vec step = (tau / bc1) * m.array() /
               ((v.array() / bc2).sqrt() + config.eps);
    theta -= step;
    if (project) project(theta);
    if (config.stop_tol > 0.0 && step.norm() < config.stop_tol) break;
  }
  return theta;
}

GridResult grid_search(const std::function<double(double)>& objective,
                       double lo, double hi, int points, int refine_levels) {
  if (!(lo < hi) || points < 3) {
    throw std::invalid_argument("grid_search: need lo < hi and points >= 3");
  }
  const double orig_lo = lo, orig_hi = hi;
  GridResult best{lo, objective(lo)};
  for (int level = 0; level <= refine_levels; ++level) {
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double a = lo + i * step;
      const double val = objective(a);
      if (val < best.best_value) best = {a, val};
    }
    lo = std::max(orig_lo, best.best_arg - step);
    hi = std::min(orig_hi, best.best_arg + step);
  }
  return best;
}

}  // namespace pmaj
