#include "pmaj/denoise.hpp"
#include <memory>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pmaj {

double psnr(const Mat& x, const Mat& ref) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols()) {
    throw std::invalid_argument("psnr: shape mismatch");
  }
  const double mse = (x - ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return kInf;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

SaddleProblem denoise_saddle(const LinearMap& k, const Mat& y) {
  SaddleProblem sp;
  sp.k = k;
  sp.dual_prox = [](const Vec& p, double) {
    return p.cwiseMax(-1.0).cwiseMin(1.0);
  };
  Vec yv = flatten(y);
  sp.primal_step = [yv](const Vec& xbar, const Vec& kty, double tau) {
    return (xbar + tau * (yv - kty)) / (1.0 + tau);
  };
  sp.gamma = 1.0;
  sp.x0 = yv;
  sp.p0 = Vec::Zero(k.out_dim);
  return sp;
}

}  // namespace

Mat denoise(const FilterBank& bank, const Mat& y, const SolverConfig& config) {
  const int h = static_cast<int>(y.rows());
  const int w = static_cast<int>(y.cols());
  LinearMap k = filterbank_map(bank, h, w);
  SaddleResult r = primal_dual(denoise_saddle(k, y), config);
  return unflatten(r.x, h, w);
}

Mat tv_denoise(const Mat& y, double alpha, const SolverConfig& config) {
  const int h = static_cast<int>(y.rows());
  const int w = static_cast<int>(y.cols());
  if (alpha <= 0.0) return y;
  LinearMap k = grad_map(h, w, alpha);
  SaddleResult r = primal_dual(denoise_saddle(k, y), config);
  return unflatten(r.x, h, w);
}

TvBaselineResult tv_baseline(const PatchCorpus& corpus, double alpha_lo,
                             double alpha_hi, int points,
                             const SolverConfig& config) {
  if (corpus.noisy.empty()) throw std::invalid_argument("tv_baseline: empty corpus");
  auto neg_psnr = [&](double alpha) {
    double s = 0.0;
    for (size_t i = 0; i < corpus.noisy.size(); ++i) {
      const double v = psnr(tv_denoise(corpus.noisy[i], alpha, config),
                            corpus.clean[i]);
      s += std::isinf(v) ? 1e6 : v;
    }
    return -s / static_cast<double>(corpus.noisy.size());
  };
  GridResult g = grid_search(neg_psnr, alpha_lo, alpha_hi, points, 1);
  return {g.best_arg, -g.best_value};
}

namespace {

struct SurrogateTerms {
  // per-sample anchor and loss-linearization data
  std::vector<Mat> xbar;
  std::vector<Mat> target;   // y_i + g_i, the quadratic center
  std::vector<double> cconst;
};

SurrogateTerms build_terms(const PatchCorpus& corpus,
                           const std::vector<Mat>* anchors) {
  SurrogateTerms t;
  const size_t n = corpus.clean.size();
  for (size_t i = 0; i < n; ++i) {
    const Mat& xs = corpus.clean[i];
    const Mat& y = corpus.noisy[i];
    if (anchors) {
      const Mat& xb = (*anchors)[i];
      Mat g = xb - xs;  // grad of the quadratic loss at the anchor
      t.xbar.push_back(xb);
      t.target.push_back(y + g);
      t.cconst.push_back(0.5 * g.squaredNorm() - flatten(g).dot(flatten(xb)));
    } else {
      t.xbar.push_back(xs);
      t.target.push_back(y);
      t.cconst.push_back(0.0);
    }
  }
  return t;
}

double objective_and_grad(const FilterBank& bank, const PatchCorpus& corpus,
                          const SurrogateTerms& terms,
                          const std::vector<Vec>& duals, Mat* dcoeff,
                          std::vector<Vec>* dduals) {
  const size_t n = corpus.clean.size();
  const int h = static_cast<int>(corpus.clean[0].rows());
  const int w = static_cast<int>(corpus.clean[0].cols());
  const int npix = h * w;
  const std::vector<Mat> kernels = bank.kernels();
  const std::vector<Mat> atoms = dct_atoms(bank.side);

  double value = 0.0;
  std::vector<Mat> kgrad;
  if (dcoeff) kgrad.assign(bank.filters, Mat::Zero(bank.side, bank.side));

  for (size_t i = 0; i < n; ++i) {
    const Mat& xb = terms.xbar[i];
    const Mat& y = corpus.noisy[i];
    const Mat& tgt = terms.target[i];

    value += 0.5 * (xb - y).squaredNorm() - 0.5 * y.squaredNorm() +
             terms.cconst[i];

    // D^T p_i
    Mat dtp = Mat::Zero(h, w);
    for (int k = 0; k < bank.filters; ++k) {
      dtp += conv_adjoint(kernels[k],
                          unflatten(duals[i].segment(
                                        static_cast<Eigen::Index>(k) * npix, npix),
                                    h, w));
    }
    Mat r = dtp - tgt;
    value += 0.5 * r.squaredNorm();

    if (dduals) {
      Vec dp(static_cast<Eigen::Index>(bank.filters) * npix);
      for (int k = 0; k < bank.filters; ++k) {
        dp.segment(static_cast<Eigen::Index>(k) * npix, npix) =
            flatten(conv_apply(kernels[k], r));
      }
      (*dduals)[i] = dp;
    }

    for (int k = 0; k < bank.filters; ++k) {
      Mat resp = conv_apply(kernels[k], xb);
      value += resp.cwiseAbs().sum();
      if (dcoeff) {
        Mat s = resp.unaryExpr(
            [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        kgrad[k] += kernel_gradient(xb, s, bank.side);
        kgrad[k] += kernel_gradient(
            r,
            unflatten(duals[i].segment(static_cast<Eigen::Index>(k) * npix, npix),
                      h, w),
            bank.side);
      }
    }
  }

  if (dcoeff) {
    dcoeff->resize(bank.filters, bank.side * bank.side - 1);
    for (int k = 0; k < bank.filters; ++k) {
      for (size_t j = 0; j < atoms.size(); ++j) {
        (*dcoeff)(k, static_cast<Eigen::Index>(j)) =
            kgrad[k].cwiseProduct(atoms[j]).sum();
      }
    }
  }
  return value;
}

}  // namespace

double filter_surrogate_objective(const FilterBank& bank,
                                  const PatchCorpus& corpus,
                                  const std::vector<Vec>& duals,
                                  const std::vector<Mat>* anchors) {
  SurrogateTerms terms = build_terms(corpus, anchors);
  return objective_and_grad(bank, corpus, terms, duals, nullptr, nullptr);
}

double filter_surrogate_gradient(const FilterBank& bank,
                                 const PatchCorpus& corpus,
                                 const std::vector<Vec>& duals, Mat* dcoeff,
                                 std::vector<Vec>* dduals,
                                 const std::vector<Mat>* anchors) {
  SurrogateTerms terms = build_terms(corpus, anchors);
  if (dduals) dduals->assign(corpus.clean.size(), Vec());
  return objective_and_grad(bank, corpus, terms, duals, dcoeff, dduals);
}

FilterTrainResult train_filters_surrogate(const PatchCorpus& corpus,
                                          const FilterBank& bank0,
                                          const FilterTrainConfig& config,
                                          const std::vector<Mat>* anchors,
                                          const std::vector<Vec>* warm_duals) {
  if (corpus.clean.empty()) throw std::invalid_argument("train: empty corpus");
  const size_t n = corpus.clean.size();
  const int h = static_cast<int>(corpus.clean[0].rows());
  const int w = static_cast<int>(corpus.clean[0].cols());
  const int npix = h * w;
  const int ncoef = bank0.side * bank0.side - 1;
  const SurrogateTerms terms = build_terms(corpus, anchors);

  // pack [coeff; p_1; ...; p_n]
  const Eigen::Index coef_len = static_cast<Eigen::Index>(bank0.filters) * ncoef;
  const Eigen::Index dual_len = static_cast<Eigen::Index>(bank0.filters) * npix;
  Vec v(coef_len + static_cast<Eigen::Index>(n) * dual_len);
  v.head(coef_len) = Eigen::Map<const Vec>(bank0.coeff.data(), coef_len);
  for (size_t i = 0; i < n; ++i) {
    v.segment(coef_len + i * dual_len, dual_len) =
        warm_duals && warm_duals->size() == n ? (*warm_duals)[i]
                                              : Vec::Zero(dual_len);
  }

  auto unpack_bank = [&](const Vec& vv) {
    FilterBank b = bank0;
    b.coeff = Eigen::Map<const Mat>(vv.data(), bank0.filters, ncoef);
    return b;
  };
  auto unpack_duals = [&](const Vec& vv) {
    std::vector<Vec> d(n);
    for (size_t i = 0; i < n; ++i)
      d[i] = vv.segment(coef_len + i * dual_len, dual_len);
    return d;
  };

  auto vg = [&](const Vec& vv, Vec& grad) {
    FilterBank b = unpack_bank(vv);
    std::vector<Vec> duals = unpack_duals(vv);
    Mat dcoeff;
    std::vector<Vec> dduals(n);
    const double val =
        objective_and_grad(b, corpus, terms, duals, &dcoeff, &dduals);
    grad.resize(vv.size());
    grad.head(coef_len) = Eigen::Map<const Vec>(dcoeff.data(), coef_len);
    for (size_t i = 0; i < n; ++i)
      grad.segment(coef_len + i * dual_len, dual_len) = dduals[i];
    return val;
  };
  auto project = [&](Vec& vv) {
    auto tail = vv.tail(vv.size() - coef_len);
    tail = tail.cwiseMax(-1.0).cwiseMin(1.0);
  };

  auto objective_of = [&](const Vec& vv) {
    FilterBank b = unpack_bank(vv);
    return filter_surrogate_objective(b, corpus, unpack_duals(vv), anchors);
  };

  FilterTrainResult out;
  double tau = config.tau;
  double best = objective_of(v);
  int halvings = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    AdamConfig ac;
    ac.max_iter = config.steps_per_epoch;
    Vec cand = adaptive_moment_descent(vg, v, tau, project, ac);
    const double val = objective_of(cand);
    if (!std::isfinite(val)) throw SolverError("filter training: non-finite objective");
    if (val <= best) {
      v = cand;
      best = val;
      out.epochs.push_back({epoch, tau, val});
    } else {
      tau *= 0.5;
      if (++halvings > config.max_halvings) break;
    }
  }
  out.bank = unpack_bank(v);
  out.duals = unpack_duals(v);
  return out;
}

DenoiseReport run_iterative_denoise_training(const PatchCorpus& train,
                                             const PatchCorpus& heldout,
                                             const FilterBank& bank0,
                                             const DenoiseConfig& config,
                                             const FilterTrainConfig& tconfig) {
  const auto t0 = std::chrono::steady_clock::now();
  const size_t n = train.clean.size();
  const int ncoef = bank0.side * bank0.side - 1;

  auto heldout_psnr = [&](const FilterBank& bank) {
    double s = 0.0;
    for (size_t i = 0; i < heldout.noisy.size(); ++i) {
      s += psnr(denoise(bank, heldout.noisy[i], config.inference),
                heldout.clean[i]);
    }
    return s / static_cast<double>(heldout.noisy.size());
  };

  DenoiseReport report;

  // stage 1: single-shot Bregman surrogate, anchors = x*
  FilterTrainResult single = train_filters_surrogate(train, bank0, tconfig);
  report.psnr_single = heldout_psnr(single.bank);
  report.epochs = single.epochs;

  // stage 2: guarded iterative scheme from the single-shot parameters
  auto duals = std::make_shared<std::vector<Vec>>(single.duals);
  auto coeff_to_bank = [&](const Vec& theta) {
    FilterBank b = bank0;
    b.coeff = Eigen::Map<const Mat>(theta.data(), bank0.filters, ncoef);
    return b;
  };

  IterativeModel model;
  model.minimize_surrogate = [&](const Vec& theta,
                                 const std::vector<Vec>& anchors, double tau,
                                 int /*steps*/) {
    std::vector<Mat> anchor_mats;
    const std::vector<Mat>* anchor_ptr = nullptr;
    if (anchors.size() == n) {
      for (const Vec& a : anchors) {
        anchor_mats.push_back(
            unflatten(a, static_cast<int>(train.clean[0].rows()),
                      static_cast<int>(train.clean[0].cols())));
      }
      anchor_ptr = &anchor_mats;
    }
    FilterTrainConfig tc = tconfig;
    tc.tau = tau;
    FilterTrainResult r = train_filters_surrogate(
        train, coeff_to_bank(theta), tc, anchor_ptr, duals.get());
    *duals = r.duals;
    const double val =
        filter_surrogate_objective(r.bank, train, r.duals, anchor_ptr);
    Vec theta_out =
        Eigen::Map<const Vec>(r.bank.coeff.data(), r.bank.coeff.size());
    return std::make_pair(theta_out, val);
  };
  model.solve_lower = [&](const Vec& theta) {
    FilterBank b = coeff_to_bank(theta);
    std::vector<Vec> xs;
    for (size_t i = 0; i < n; ++i) {
      xs.push_back(flatten(denoise(b, train.noisy[i], config.inference)));
    }
    return xs;
  };
  model.loss = [&](const std::vector<Vec>& xs) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      s += 0.5 * (xs[i] - flatten(train.clean[i])).squaredNorm();
    }
    return s;
  };

  IterativeConfig ic;
  ic.max_outer = config.outer_budget;
  ic.tau0 = tconfig.tau;
  Vec theta0 =
      Eigen::Map<const Vec>(single.bank.coeff.data(), single.bank.coeff.size());
  IterationState state = iterative_train(model, theta0, ic);

  report.bank = coeff_to_bank(state.theta);
  report.psnr_iterative = heldout_psnr(report.bank);
  report.loss_trace = state.loss_trace;
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

}  // namespace pmaj
