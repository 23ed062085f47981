#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pmaj/atoms.hpp"

using namespace pmaj;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

std::mt19937_64 rng(12345);
double unif(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}
Vec rand_vec(int n, double lo = -2.0, double hi = 2.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(lo, hi);
  return v;
}
Vec rand_simplex(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(0.05, 1.0);
  return v / v.sum();
}

}  // namespace

TEST_CASE("energy evaluation") {
  EnergyAtom quad = EnergyAtom::quadratic(scalar(1.5));
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.2, 1);
  SplitEnergy e{quad, l1};
  CHECK(eval_energy(e, scalar(0.3)) == doctest::Approx(1.08).epsilon(1e-12));

  SplitEnergy zero{EnergyAtom::zero(4), EnergyAtom::zero(4)};
  CHECK(eval_energy(zero, rand_vec(4)) == 0.0);

  EnergyAtom ent = EnergyAtom::entropy_simplex(4);
  const int n = 5;
  CHECK(ent.eval(Vec::Constant(n, 1.0 / n)) ==
        doctest::Approx(-std::log(double(n))).epsilon(1e-12));
}

TEST_CASE("canonical subgradients") {
  EnergyAtom quad = EnergyAtom::quadratic(scalar(1.5));
  CHECK(quad.subgradient(scalar(0.3))[0] == doctest::Approx(-1.2));
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
  CHECK(l1.subgradient(scalar(0.3))[0] == doctest::Approx(1.0));
  CHECK(l1.subgradient(scalar(0.0))[0] == 0.0);   // minimal-norm selection
}

TEST_CASE("conjugate values") {
  EnergyAtom quad = EnergyAtom::quadratic(scalar(1.5));
  CHECK(quad.conjugate(scalar(0.0)) == doctest::Approx(0.0));
  CHECK(quad.conjugate(scalar(0.7)) ==
        doctest::Approx(0.5 * 0.49 + 0.7 * 1.5).epsilon(1e-12));
  EnergyAtom ent = EnergyAtom::entropy_simplex(4);
  CHECK(ent.conjugate(Vec::Zero(4)) == doctest::Approx(std::log(4.0)));
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.2, 1);
  CHECK(l1.conjugate(scalar(1.5)) == kInf);
  CHECK(l1.conjugate(scalar(1.1)) == 0.0);
}

TEST_CASE("Bregman distances") {
  EnergyAtom q0 = EnergyAtom::quadratic(Vec::Zero(3));
  Vec x = rand_vec(3), z = rand_vec(3);
  CHECK(q0.bregman(x, z, q0.subgradient(z)) ==
        doctest::Approx(0.5 * (x - z).squaredNorm()).epsilon(1e-12));
  CHECK(q0.bregman(x, x, q0.subgradient(x)) == doctest::Approx(0.0));

  EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
  // same-sign case: |0.3| - |1.5| - 1*(0.3-1.5) = 0
  CHECK(l1.bregman(scalar(0.3), scalar(1.5), scalar(1.0)) ==
        doctest::Approx(0.0));
}

TEST_CASE("W-gap values") {
  EnergyAtom q0 = EnergyAtom::quadratic(Vec::Zero(1));   // 1/2 x^2
  CHECK(q0.w_gap(scalar(0.8), scalar(0.8)) == doctest::Approx(0.0));
  for (int t = 0; t < 10; ++t) {
    const double p = unif(-2, 2), x = unif(-2, 2);
    CHECK(q0.w_gap(scalar(p), scalar(x)) ==
          doctest::Approx(0.5 * (p - x) * (p - x)).epsilon(1e-12));
  }
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
  CHECK(l1.w_gap(scalar(0.5), scalar(0.3)) == doctest::Approx(0.15));
  CHECK(l1.w_gap(scalar(1.5), scalar(0.3)) == kInf);
}

TEST_CASE("proximal maps") {
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
  CHECK(l1.prox(scalar(1.5), 1.2)[0] == doctest::Approx(0.3));
  CHECK(l1.prox(scalar(1.5), 2.0)[0] == 0.0);
  EnergyAtom quad = EnergyAtom::quadratic(scalar(1.5));
  const double xb = 0.4, tau = 0.7;
  CHECK(quad.prox(scalar(xb), tau)[0] ==
        doctest::Approx((xb + tau * 1.5) / (1.0 + tau)).epsilon(1e-12));
}

TEST_CASE("scalar L1 prox equals grid argmin") {
  EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
  for (int t = 0; t < 5; ++t) {
    const double xb = unif(-3, 3), tau = unif(0.1, 2.5);
    double best = 0, bestv = kInf;
    for (int i = 0; i <= 600000; ++i) {
      const double x = -3.0 + 6.0 * i / 600000.0;
      const double v = 0.5 * (x - xb) * (x - xb) + tau * std::abs(x);
      if (v < bestv) { bestv = v; best = x; }
    }
    CHECK(l1.prox(scalar(xb), tau)[0] == doctest::Approx(best).epsilon(2e-5));
  }
}

TEST_CASE("prox optimality residual") {
  for (int t = 0; t < 20; ++t) {
    EnergyAtom quad = EnergyAtom::quadratic(rand_vec(3));
    EnergyAtom l1 = EnergyAtom::weighted_l1(unif(0.2, 2.0), 3);
    EnergyAtom ent = EnergyAtom::entropy_simplex(4);
    const double tau = unif(0.2, 2.0);
    for (const EnergyAtom* a : {&quad, &l1}) {
      Vec xb = rand_vec(3);
      Vec x = a->prox(xb, tau);
      // 0 in x - xb + tau dA(x): check via the W-gap of (xb - x)/tau at x
      CHECK(a->w_gap((xb - x) / tau, x) <= 1e-8);
    }
    // entropy prox: optimality via constant (xb - x)/tau - grad h(x) per coord
    Vec xb = rand_simplex(4) + rand_vec(4, 0.0, 0.5);
    Vec x = ent.prox(xb, tau);
    CHECK(std::abs(x.sum() - 1.0) <= 1e-10);
    Vec s = (xb - x) / tau - x.array().log().matrix();
    CHECK((s.array() - s.mean()).abs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("entropy Bregman prox") {
  Vec xb = rand_simplex(4);
  CHECK((entropy_bregman_prox(xb, Vec::Zero(4), 0.9) - xb)
            .lpNorm<Eigen::Infinity>() <= 1e-14);
  Vec g = rand_vec(4);
  const double tau = 0.8;
  Vec u = Vec::Constant(4, 0.25);
  CHECK((entropy_bregman_prox(u, g, tau) - softmax(Vec(-tau * g)))
            .lpNorm<Eigen::Infinity>() <= 1e-12);
  for (int t = 0; t < 10; ++t) {
    Vec out = entropy_bregman_prox(rand_simplex(6), rand_vec(6, -30, 30), 1.3);
    CHECK(std::abs(out.sum() - 1.0) <= 1e-12);
    CHECK(out.minCoeff() >= 0.0);
  }
}

TEST_CASE("log-sum-exp and softmax") {
  CHECK(log_sum_exp(Vec::Zero(3)) == doctest::Approx(std::log(3.0)));
  CHECK((softmax(Vec::Zero(3)) - Vec::Constant(3, 1.0 / 3))
            .lpNorm<Eigen::Infinity>() <= 1e-15);
  Vec p = rand_vec(5);
  const double c = 3.7;
  CHECK((softmax(Vec(p.array() + c)) - softmax(p)).lpNorm<Eigen::Infinity>() <=
        1e-12);
  CHECK(log_sum_exp(Vec(p.array() + c)) ==
        doctest::Approx(log_sum_exp(p) + c).epsilon(1e-12));
  CHECK(log_sum_exp(Vec(Vec::Constant(2, 1000.0))) ==
        doctest::Approx(1000.0 + std::log(2.0)));   // stabilized
}

TEST_CASE("Fenchel-Young inequality on samples") {
  for (int t = 0; t < 50; ++t) {
    EnergyAtom quad = EnergyAtom::quadratic(rand_vec(3));
    Vec x = rand_vec(3), p = rand_vec(3);
    CHECK(quad.eval(x) + quad.conjugate(p) - p.dot(x) >= -1e-9);

    EnergyAtom l1 = EnergyAtom::weighted_l1(unif(0.3, 2.0), 3);
    Vec pf = rand_vec(3, -0.29, 0.29);
    CHECK(l1.eval(x) + l1.conjugate(pf) - pf.dot(x) >= -1e-9);

    EnergyAtom ent = EnergyAtom::entropy_simplex(4);
    Vec xs = rand_simplex(3);
    CHECK(ent.eval(xs) + ent.conjugate(p) - p.dot(xs) >= -1e-9);
  }
}

TEST_CASE("Bregman identity for quadratics") {
  // D_E^p(x, z) = D_{E*}^x(p, q) with q in dE(x), p in dE(z)
  for (int t = 0; t < 100; ++t) {
    EnergyAtom quad = EnergyAtom::quadratic(rand_vec(4));
    Vec x = rand_vec(4), z = rand_vec(4);
    Vec q = quad.subgradient(x), p = quad.subgradient(z);
    const double primal = quad.bregman(x, z, p);
    const double dual =
        quad.conjugate(p) - quad.conjugate(q) - x.dot(p - q);
    CHECK(std::abs(primal - dual) <= 1e-8);
  }
}

TEST_CASE("W-gap zero iff subgradient") {
  for (int t = 0; t < 50; ++t) {
    EnergyAtom quad = EnergyAtom::quadratic(rand_vec(3));
    Vec x = rand_vec(3);
    CHECK(quad.w_gap(quad.subgradient(x), x) <= 1e-12);
    Vec p = quad.subgradient(x) + rand_vec(3, 0.2, 0.8);
    CHECK(quad.w_gap(p, x) > 1e-8);   // not a subgradient -> positive gap

    EnergyAtom l1 = EnergyAtom::weighted_l1(1.0, 1);
    Vec xs = rand_vec(3);
    CHECK(l1.w_gap(l1.subgradient(xs), xs) <= 1e-12);
  }
}

TEST_CASE("strong convexity reporting") {
  for (int t = 0; t < 50; ++t) {
    EnergyAtom quad = EnergyAtom::quadratic(rand_vec(3));
    REQUIRE(quad.modulus() == 1.0);
    Vec x = rand_vec(3), z = rand_vec(3);
    CHECK(quad.bregman(x, z, quad.subgradient(z)) -
              0.5 * quad.modulus() * (x - z).squaredNorm() >=
          -1e-9);
    EnergyAtom ent = EnergyAtom::entropy_simplex(4);
    REQUIRE(ent.modulus() == 1.0);   // Pinsker on the simplex
    Vec a = rand_simplex(4), b = rand_simplex(4);
    BregmanGenerator gen = BregmanGenerator::entropy();
    CHECK(gen.value(a, b) - 0.5 * (a - b).squaredNorm() >= -1e-9);
  }
}

TEST_CASE("loss generators") {
  BregmanGenerator q = BregmanGenerator::quadratic();
  Vec x = rand_vec(3), z = rand_vec(3);
  CHECK(q.value(x, z) == doctest::Approx(0.5 * (x - z).squaredNorm()));
  CHECK(q.value(x, x) == 0.0);
  BregmanGenerator e = BregmanGenerator::entropy();
  Vec a = rand_simplex(4);
  CHECK(e.value(a, a) <= 1e-12);
  CHECK(e.value(a, rand_simplex(4)) >= 0.0);
}
