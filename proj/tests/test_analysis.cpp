#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "pmaj/denoise.hpp"
#include "pmaj/io.hpp"

using namespace pmaj;

namespace {

std::mt19937_64 rng(90210);
double unif(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}
Mat rand_mat(int h, int w, double lo = -2.0, double hi = 2.0) {
  Mat m(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) m(i, j) = unif(lo, hi);
  return m;
}

Mat dct_project(const Mat& kernel) {
  auto atoms = dct_atoms(static_cast<int>(kernel.rows()));
  Mat coeffs(1, atoms.size());
  for (size_t a = 0; a < atoms.size(); ++a)
    coeffs(0, a) = (atoms[a].array() * kernel.array()).sum();
  return coeffs;
}

}  // namespace

TEST_CASE("DCT atoms") {
  CHECK(dct_atoms(2).size() == 3);
  auto a3 = dct_atoms(3);
  REQUIRE(a3.size() == 8);
  for (size_t i = 0; i < a3.size(); ++i) {
    CHECK(std::abs(a3[i].sum()) <= 1e-12);   // zero mean
    for (size_t j = 0; j < a3.size(); ++j) {
      const double g = (a3[i].array() * a3[j].array()).sum();
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  }
}

TEST_CASE("synthesized kernels are zero-mean") {
  for (int t = 0; t < 10; ++t) {
    FilterBank bank = FilterBank::zeros(3, 3);
    bank.coeff = rand_mat(3, 8, -5.0, 5.0);
    for (const Mat& k : bank.kernels()) CHECK(std::abs(k.sum()) <= 1e-10);
  }
}

TEST_CASE("convolution against a direct reference") {
  Mat x = rand_mat(7, 9);
  Mat k = rand_mat(3, 3);
  Mat out = conv_apply(k, x);
  REQUIRE(out.rows() == 7);
  REQUIRE(out.cols() == 9);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 9; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int ii = i + a - 1, jj = j + b - 1;
          if (ii >= 0 && ii < 7 && jj >= 0 && jj < 9) s += k(a, b) * x(ii, jj);
        }
      CHECK(out(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  CHECK_THROWS(conv_apply(k, rand_mat(2, 2)));
}

TEST_CASE("adjoint inner-product tests") {
  Mat k = rand_mat(3, 3);
  Mat x = rand_mat(6, 8);
  Mat p = rand_mat(6, 8);
  const double lhs = (conv_apply(k, x).array() * p.array()).sum();
  const double rhs = (x.array() * conv_adjoint(k, p).array()).sum();
  CHECK(std::abs(lhs - rhs) <= 1e-8);

  FilterBank bank = FilterBank::zeros(3, 3);
  bank.coeff = rand_mat(3, 8);
  CHECK_NOTHROW(check_adjoint(filterbank_map(bank, 6, 8), 5));
}

TEST_CASE("kernel gradient matches finite differences") {
  Mat x = rand_mat(6, 6);
  Mat s = rand_mat(6, 6);
  Mat g = kernel_gradient(x, s, 3);
  const double h = 1e-6;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Mat kp = Mat::Zero(3, 3), km = Mat::Zero(3, 3);
      kp(a, b) = h;
      km(a, b) = -h;
      const double fd = ((conv_apply(kp, x).array() * s.array()).sum() -
                         (conv_apply(km, x).array() * s.array()).sum()) /
                        (2 * h);
      CHECK(g(a, b) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("zero bank denoise is the identity") {
  FilterBank zero = FilterBank::zeros(3, 3);
  Mat y = rand_mat(8, 8, 0.0, 255.0);
  CHECK((denoise(zero, y) - y).lpNorm<Eigen::Infinity>() <= 1e-8);
  for (const Mat& m :
       filterbank_apply(zero, y)) CHECK(m.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("finite-difference bank: interior identity and explicit-matrix oracle") {
  const int n = 10;
  Mat x = rand_mat(n, n, -30.0, 30.0);
  const double alpha = 3.0;
  FilterBank bank = FilterBank::zeros(2, 3);
  Mat kh = Mat::Zero(3, 3), kv = Mat::Zero(3, 3);
  kh(1, 1) = alpha;
  kh(1, 2) = -alpha;
  kv(1, 1) = alpha;
  kv(2, 1) = -alpha;
  bank.coeff.row(0) = dct_project(kh);
  bank.coeff.row(1) = dct_project(kv);

  // away from the padded border the feature maps are exact finite differences
  auto maps = filterbank_apply(bank, x);
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      CHECK(maps[0](i, j) ==
            doctest::Approx(alpha * (x(i, j) - x(i, j + 1))).epsilon(1e-10));
      CHECK(maps[1](i, j) ==
            doctest::Approx(alpha * (x(i, j) - x(i + 1, j))).epsilon(1e-10));
    }

  // assemble the same operator as a dense matrix and solve the dual directly
  LinearMap lm = filterbank_map(bank, n, n);
  Eigen::MatrixXd dmat(lm.out_dim, lm.in_dim);
  for (int c = 0; c < lm.in_dim; ++c) {
    Vec e = Vec::Zero(lm.in_dim);
    e(c) = 1.0;
    dmat.col(c) = lm.apply(e);
  }
  Mat y = rand_mat(n, n, 0.0, 60.0);
  Vec yv = flatten(y);
  Vec p = Vec::Zero(lm.out_dim);
  Vec momentum = p;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dmat * dmat.transpose());
  const double step = 1.0 / es.eigenvalues().maxCoeff();
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    Vec g = -dmat * (yv - dmat.transpose() * momentum);
    Vec pn = (momentum - step * g).cwiseMax(-1.0).cwiseMin(1.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = pn + ((t - 1.0) / tn) * (pn - p);
    p = pn;
    t = tn;
  }
  Vec xoracle = yv - dmat.transpose() * p;

  SolverConfig cfg;
  cfg.max_iter = 200000;
  cfg.tol = 0.0;
  Mat a = denoise(bank, y, cfg);
  auto energy = [&](const Vec& v) {
    return 0.5 * (v - yv).squaredNorm() + (dmat * v).lpNorm<1>();
  };
  CHECK(std::abs(energy(flatten(a)) - energy(xoracle)) <= 1e-4);
  // the fidelity is 1-strongly convex, so iterates near the optimum obey
  // 1/2||x - x*||^2 <= energy gap
  CHECK((flatten(a) - xoracle).lpNorm<Eigen::Infinity>() <= 2e-2);
}

TEST_CASE("8x8 denoise vs prox-gradient dual oracle") {
  FilterBank bank = FilterBank::zeros(2, 3);
  bank.coeff = rand_mat(2, 8, -1.0, 1.0);
  Mat y = rand_mat(8, 8, 0.0, 30.0);
  SolverConfig cfg;
  cfg.max_iter = 20000;
  cfg.tol = 1e-12;
  Mat x = denoise(bank, y, cfg);

  LinearMap d = filterbank_map(bank, 8, 8);
  Vec yv = flatten(y);
  auto objective = [&](const Vec& xv) {
    return 0.5 * (xv - yv).squaredNorm() + d.apply(xv).lpNorm<1>();
  };
  // dual: min_p 1/2||y - D^T p||^2 over the unit box, FISTA
  ProxGradProblem pg;
  pg.f = [&](const Vec& p) {
    return 0.5 * (yv - d.adjoint(p)).squaredNorm();
  };
  pg.grad_f = [&](const Vec& p) {
    return Vec(-d.apply(yv - d.adjoint(p)));
  };
  pg.g_value = [](const Vec&) { return 0.0; };
  pg.prox_g = [](const Vec& p, double) {
    return p.cwiseMax(-1.0).cwiseMin(1.0);
  };
  pg.lipschitz = d.norm_bound * d.norm_bound;
  pg.x0 = Vec::Zero(d.out_dim);
  SolverConfig oc;
  oc.max_iter = 100000;
  oc.tol = 1e-14;
  Vec popt = prox_gradient(pg, oc).x;
  Vec xoracle = yv - d.adjoint(popt);
  CHECK(objective(flatten(x)) <=
        objective(xoracle) + 1e-7 * (1.0 + std::abs(objective(xoracle))));
}

TEST_CASE("PSNR") {
  Mat a = rand_mat(4, 4, 0.0, 255.0);
  CHECK(psnr(a, a) == kInf);
  Mat b = a;
  b(0, 0) += 4.0;   // MSE = 1 on 16 pixels
  CHECK(psnr(b, a) == doctest::Approx(48.1308).epsilon(1e-4));
  Mat c = a.array() + 255.0;
  CHECK(psnr(c, a) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("TV baseline grid behavior") {
  // noiseless corpus: optimal alpha at the lower grid boundary
  PatchCorpus clean;
  clean.side = 8;
  Mat img = rand_mat(8, 8, 0.0, 255.0);
  clean.clean.push_back(img);
  clean.noisy.push_back(img);
  auto r0 = tv_baseline(clean, 0.5, 20.0, 6);
  CHECK(r0.alpha == doctest::Approx(0.5));

  // constant corpus: PSNR infinite everywhere, tie-break to the lower bound
  PatchCorpus constant;
  constant.side = 8;
  constant.clean.push_back(Mat::Constant(8, 8, 99.0));
  constant.noisy.push_back(Mat::Constant(8, 8, 99.0));
  auto rc = tv_baseline(constant, 0.5, 20.0, 6);
  CHECK(rc.alpha == doctest::Approx(0.5));

  // noisy piecewise-constant corpus: strictly interior optimum
  PatchCorpus pc;
  pc.side = 16;
  Mat block = Mat::Constant(16, 16, 60.0);
  block.block(4, 4, 8, 8).setConstant(190.0);
  pc.clean.push_back(block);
  pc.noisy.push_back(add_gaussian_noise(block, 25.0, 3));
  auto ri = tv_baseline(pc, 1.0, 80.0, 12);
  CHECK(ri.alpha > 1.0);
  CHECK(ri.alpha < 80.0);
}

TEST_CASE("surrogate objective at the zero bank is the noise energy") {
  SplitCorpus sc = extract_patches(synth_image(64, 96, 5), 12, 6, 25.0, 6);
  FilterBank zero = FilterBank::zeros(3, 3);
  std::vector<Vec> duals(sc.train.clean.size(),
                         Vec::Zero(3LL * 12 * 12));
  double noise = 0.0;
  for (size_t i = 0; i < sc.train.clean.size(); ++i)
    noise += 0.5 * (sc.train.clean[i] - sc.train.noisy[i]).squaredNorm();
  CHECK(filter_surrogate_objective(zero, sc.train, duals) ==
        doctest::Approx(noise).epsilon(1e-10));
}

TEST_CASE("noiseless pair: zero bank attains surrogate zero") {
  PatchCorpus c;
  c.side = 8;
  Mat img = rand_mat(8, 8, 0.0, 255.0);
  c.clean.push_back(img);
  c.noisy.push_back(img);
  FilterBank zero = FilterBank::zeros(2, 3);
  std::vector<Vec> duals(1, Vec::Zero(2LL * 64));
  CHECK(filter_surrogate_objective(zero, c, duals) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("surrogate training decreases the objective monotonically") {
  SplitCorpus sc = extract_patches(synth_image(64, 96, 5), 12, 6, 25.0, 6);
  FilterBank bank0 = random_bank(3, 3, 0.01, 11);
  FilterTrainConfig tc;
  tc.epochs = 8;
  FilterTrainResult r = train_filters_surrogate(sc.train, bank0, tc);
  REQUIRE(r.epochs.size() >= 2);
  for (size_t i = 1; i < r.epochs.size(); ++i)
    CHECK(r.epochs[i].objective <= r.epochs[i - 1].objective + 1e-9);
  CHECK(r.epochs.back().objective < r.epochs.front().objective);
}

TEST_CASE("surrogate majorizes the true loss on small instances") {
  SplitCorpus sc = extract_patches(synth_image(64, 96, 9), 8, 4, 25.0, 13);
  FilterBank bank = random_bank(2, 3, 0.1, 17);
  std::vector<Vec> duals;
  // optimal duals via FISTA per sample at anchors = x*
  for (size_t i = 0; i < sc.train.clean.size(); ++i) {
    LinearMap d = filterbank_map(bank, 8, 8);
    Vec target = flatten(sc.train.noisy[i]);
    ProxGradProblem pg;
    pg.f = [&, target](const Vec& p) {
      return 0.5 * (d.adjoint(p) - target).squaredNorm();
    };
    pg.grad_f = [&, target](const Vec& p) {
      return Vec(d.apply(d.adjoint(p) - target));
    };
    pg.g_value = [](const Vec&) { return 0.0; };
    pg.prox_g = [](const Vec& p, double) {
      return p.cwiseMax(-1.0).cwiseMin(1.0);
    };
    pg.lipschitz = d.norm_bound * d.norm_bound;
    pg.x0 = Vec::Zero(d.out_dim);
    SolverConfig oc;
    oc.max_iter = 50000;
    oc.tol = 1e-13;
    duals.push_back(prox_gradient(pg, oc).x);
  }
  const double sval = filter_surrogate_objective(bank, sc.train, duals);
  SolverConfig ic;
  ic.max_iter = 20000;
  ic.tol = 1e-10;
  double loss = 0.0;
  for (size_t i = 0; i < sc.train.clean.size(); ++i) {
    Mat x = denoise(bank, sc.train.noisy[i], ic);
    loss += 0.5 * (x - sc.train.clean[i]).squaredNorm();
  }
  CHECK(sval >= loss - 1e-6 * sc.train.clean.size());
}

TEST_CASE("scale-only surrogate training tracks the TV grid optimum") {
  // corpus where TV is the right model; the surrogate-optimal scale of a
  // frozen finite-difference pair should land within one coarse grid step of
  // the grid-search-optimal TV weight
  const int side = 24;
  Mat block = Mat::Constant(side, side, 70.0);
  block.block(6, 6, 12, 12).setConstant(180.0);
  PatchCorpus c;
  c.side = side;
  for (int i = 0; i < 4; ++i) {
    c.clean.push_back(block);
    c.noisy.push_back(add_gaussian_noise(block, 25.0, 100 + i));
  }
  Mat kh = Mat::Zero(3, 3), kv = Mat::Zero(3, 3);
  kh(1, 1) = 1.0;
  kh(1, 2) = -1.0;
  kv(1, 1) = 1.0;
  kv(2, 1) = -1.0;

  auto surrogate_at_scale = [&](double s) {
    FilterBank b = FilterBank::zeros(2, 3);
    b.coeff.row(0) = s * dct_project(kh);
    b.coeff.row(1) = s * dct_project(kv);
    LinearMap d = filterbank_map(b, side, side);
    double total = 0.0;
    for (size_t i = 0; i < c.clean.size(); ++i) {
      Vec target = flatten(c.noisy[i]);
      ProxGradProblem pg;
      pg.f = [&, target](const Vec& p) {
        return 0.5 * (d.adjoint(p) - target).squaredNorm();
      };
      pg.grad_f = [&, target](const Vec& p) {
        return Vec(d.apply(d.adjoint(p) - target));
      };
      pg.g_value = [](const Vec&) { return 0.0; };
      pg.prox_g = [](const Vec& p, double) {
        return p.cwiseMax(-1.0).cwiseMin(1.0);
      };
      pg.lipschitz = d.norm_bound * d.norm_bound;
      pg.x0 = Vec::Zero(d.out_dim);
      SolverConfig oc;
      oc.max_iter = 4000;
      oc.tol = 1e-10;
      Vec p = prox_gradient(pg, oc).x;
      std::vector<Vec> duals = {p};
      PatchCorpus one;
      one.side = side;
      one.clean.push_back(c.clean[i]);
      one.noisy.push_back(c.noisy[i]);
      total += filter_surrogate_objective(b, one, duals);
    }
    return total;
  };

  const int points = 10;
  const double lo = 4.0, hi = 58.0;
  auto s_best = grid_search(surrogate_at_scale, lo, hi, points, 0);
  auto tv_best = tv_baseline(c, lo, hi, points);
  const double step = (hi - lo) / (points - 1);
  CHECK(std::abs(s_best.best_arg - tv_best.alpha) <= step + 1e-9);
}
