#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pmaj/filterbank.hpp"
#include "pmaj/solvers.hpp"

using namespace pmaj;

namespace {

std::mt19937_64 rng(777);
double unif(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}
Vec rand_vec(int n, double lo = -2.0, double hi = 2.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(lo, hi);
  return v;
}

ProxGradProblem quadratic_problem(double target) {
  ProxGradProblem p;
  p.f = [target](const Vec& x) {
    return 0.5 * (x[0] - target) * (x[0] - target);
  };
  p.grad_f = [target](const Vec& x) { return Vec::Constant(1, x[0] - target); };
  p.g_value = [](const Vec&) { return 0.0; };
  p.prox_g = [](const Vec& x, double) { return x; };
  p.lipschitz = 1.0;
  p.x0 = Vec::Zero(1);
  return p;
}

}  // namespace

TEST_CASE("prox-gradient basics") {
  CHECK(prox_gradient(quadratic_problem(3.0)).x[0] ==
        doctest::Approx(3.0).epsilon(1e-7));

  // min 1/2 (x - 1.5)^2 + 1.2 |x| -> soft threshold 0.3
  ProxGradProblem p = quadratic_problem(1.5);
  p.g_value = [](const Vec& x) { return 1.2 * x.lpNorm<1>(); };
  p.prox_g = [](const Vec& x, double t) {
    return x.unaryExpr([t](double v) {
      return std::copysign(std::max(std::abs(v) - 1.2 * t, 0.0), v);
    });
  };
  CHECK(prox_gradient(p).x[0] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("2-D lasso vs dense grid oracle") {
  Mat a(2, 2);
  a << 1.0, 0.4, -0.3, 1.2;
  Vec b = rand_vec(2);
  const double w = 0.5;
  ProxGradProblem p;
  p.f = [&](const Vec& x) { return 0.5 * (a * x - b).squaredNorm(); };
  p.grad_f = [&](const Vec& x) { return Vec(a.transpose() * (a * x - b)); };
  p.g_value = [&](const Vec& x) { return w * x.lpNorm<1>(); };
  p.prox_g = [&](const Vec& x, double t) {
    return x.unaryExpr([&, t](double v) {
      return std::copysign(std::max(std::abs(v) - w * t, 0.0), v);
    });
  };
  p.lipschitz = (a.transpose() * a).operatorNorm();
  p.x0 = Vec::Zero(2);
  Vec sol = prox_gradient(p).x;

  const int g = 801;
  double bestv = kInf;
  Vec best(2);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      Vec x(2);
      x << -2.0 + 4.0 * i / (g - 1), -2.0 + 4.0 * j / (g - 1);
      const double v = p.f(x) + p.g_value(x);
      if (v < bestv) { bestv = v; best = x; }
    }
  CHECK((sol - best).lpNorm<Eigen::Infinity>() <= 4.0 / (g - 1));
}

TEST_CASE("objective monotone without acceleration") {
  ProxGradProblem p = quadratic_problem(2.0);
  p.lipschitz = 0.05;   // force backtracking
  SolverConfig cfg;
  cfg.accelerate = false;
  cfg.max_iter = 60;
  cfg.tol = 0.0;
  Vec x = p.x0;
  double prev = p.f(x);
  // re-run incrementally and watch the objective
  for (int k = 1; k <= 8; ++k) {
    SolverConfig c2 = cfg;
    c2.max_iter = k;
    const double v = p.f(prox_gradient(p, c2).x);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("primal-dual TV: constant image is a fixed point") {
  const int h = 6, w = 7;
  Mat y = Mat::Constant(h, w, 42.0);
  LinearMap k = grad_map(h, w, 3.0);
  SaddleProblem sp;
  sp.k = k;
  sp.dual_prox = [](const Vec& p, double) {
    return p.cwiseMax(-1.0).cwiseMin(1.0);
  };
  Vec yv = flatten(y);
  sp.primal_step = [yv](const Vec& xb, const Vec& kty, double tau) {
    return Vec((xb + tau * (yv - kty)) / (1.0 + tau));
  };
  sp.gamma = 1.0;
  sp.x0 = yv;
  sp.p0 = Vec::Zero(k.out_dim);
  SaddleResult r = primal_dual(sp);
  CHECK((r.x - yv).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("1-D TV vs independent dual oracle") {
  // min_x 1/2||x-y||^2 + alpha sum |x_{i+1}-x_i| on an 8-sample signal;
  // oracle: projected gradient on the dual min_p 1/2||y - D^T p||^2, |p|<=alpha
  const int n = 8;
  Vec y(n);
  y << 1.0, 1.1, 0.9, 3.0, 3.2, 3.1, 0.2, 0.3;
  const double alpha = 0.4;

  Mat d = Mat::Zero(n - 1, n);
  for (int i = 0; i < n - 1; ++i) { d(i, i) = -1.0; d(i, i + 1) = 1.0; }
  Vec p = Vec::Zero(n - 1);
  const double step = 1.0 / 4.0;   // ||D||^2 <= 4 in 1-D
  for (int it = 0; it < 200000; ++it) {
    Vec grad = -d * (y - d.transpose() * p);
    p = (p - step * grad).cwiseMax(-alpha).cwiseMin(alpha);
  }
  Vec oracle = y - d.transpose() * p;

  LinearMap k;
  k.in_dim = n;
  k.out_dim = n - 1;
  k.norm_bound = 2.0;
  k.apply = [d](const Vec& x) { return Vec(d * x); };
  k.adjoint = [d](const Vec& q) { return Vec(d.transpose() * q); };
  SaddleProblem sp;
  sp.k = k;
  sp.dual_prox = [alpha](const Vec& q, double) {
    return q.cwiseMax(-alpha).cwiseMin(alpha);
  };
  sp.primal_step = [y](const Vec& xb, const Vec& kty, double tau) {
    return Vec((xb + tau * (y - kty)) / (1.0 + tau));
  };
  sp.gamma = 1.0;
  sp.x0 = y;
  sp.p0 = Vec::Zero(n - 1);
  SolverConfig cfg;
  cfg.max_iter = 10000;
  cfg.tol = 1e-12;
  Vec sol = primal_dual(sp, cfg).x;
  CHECK((sol - oracle).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("adjoint checks") {
  LinearMap g = grad_map(5, 9);
  CHECK_NOTHROW(check_adjoint(g, 123));
  LinearMap broken = g;
  broken.adjoint = [g](const Vec& p) { return Vec(1.01 * g.adjoint(p)); };
  CHECK_THROWS(check_adjoint(broken, 123));
}

TEST_CASE("adaptive moment descent") {
  // constant gradient: first bias-corrected step is ~ -tau * sign(g)
  {
    Vec theta = Vec::Zero(1);
    AdamConfig cfg;
    cfg.max_iter = 1;
    Vec out = adaptive_moment_descent(
        [](const Vec&, Vec& g) {
          g = Vec::Constant(1, 2.5);
          return 0.0;
        },
        theta, 0.1, [](Vec&) {}, cfg);
    CHECK(out[0] == doctest::Approx(-0.1).epsilon(1e-6));
  }
  {
    Vec theta = Vec::Zero(1);
    Vec out = adaptive_moment_descent(
        [](const Vec& t, Vec& g) {
          g = Vec::Constant(1, t[0] - 1.2);
          return 0.5 * (t[0] - 1.2) * (t[0] - 1.2);
        },
        theta, 0.1, [](Vec&) {});
    CHECK(std::abs(out[0] - 1.2) <= 1e-3);
  }
  {  // projection keeps iterates feasible
    Vec theta = Vec::Zero(1);
    AdamConfig cfg;
    cfg.max_iter = 200;
    Vec out = adaptive_moment_descent(
        [](const Vec& t, Vec& g) {
          g = Vec::Constant(1, -1.0);
          return -t[0];
        },
        theta, 0.5,
        [](Vec& t) { t = t.cwiseMax(-1.0).cwiseMin(1.0); }, cfg);
    CHECK(out[0] <= 1.0 + 1e-15);
    CHECK(out[0] >= -1.0 - 1e-15);
  }
}

TEST_CASE("grid search") {
  auto quad = [](double a) { return (a - 2.0) * (a - 2.0); };
  auto r = grid_search(quad, 0.0, 4.0, 401, 0);
  CHECK(r.best_arg == doctest::Approx(2.0).epsilon(1e-12));

  auto mono = [](double a) { return a; };
  CHECK(grid_search(mono, 1.0, 5.0, 11, 2).best_arg == doctest::Approx(1.0));
  auto monodec = [](double a) { return -a; };
  CHECK(grid_search(monodec, 1.0, 5.0, 11, 2).best_arg == doctest::Approx(5.0));
}
