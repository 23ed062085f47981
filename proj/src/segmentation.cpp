#include "pmaj/segmentation.hpp"

#include <memory>

#include <cmath>
#include <random>
#include <stdexcept>

namespace pmaj {

namespace {

constexpr double kFloor = 1e-12;

double entropy_of(const Vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i)
    s += x[i] * std::log(std::max(x[i], kFloor));
  return s;
}

// per-pixel log-sum-exp over the class dimension of a class-major field
double field_lse_sum(const Vec& a, int n, int c) {
  double total = 0.0;
  for (int px = 0; px < n; ++px) {
    double m = -kInf;
    for (int k = 0; k < c; ++k) m = std::max(m, a[k * n + px]);
    double s = 0.0;
    for (int k = 0; k < c; ++k) s += std::exp(a[k * n + px] - m);
    total += m + std::log(s);
  }
  return total;
}

Vec field_softmax(const Vec& a, int n, int c) {
  Vec out(a.size());
  for (int px = 0; px < n; ++px) {
    double m = -kInf;
    for (int k = 0; k < c; ++k) m = std::max(m, a[k * n + px]);
    double s = 0.0;
    for (int k = 0; k < c; ++k) {
      const double e = std::exp(a[k * n + px] - m);
      out[k * n + px] = e;
      s += e;
    }
    for (int k = 0; k < c; ++k) out[k * n + px] /= s;
  }
  return out;
}

// Per-class forward-difference gradient, class-major in and out.
LinearMap field_grad_map(int h, int w, int c) {
  LinearMap g1 = grad_map(h, w);
  const int n = h * w;
  LinearMap m;
  m.in_dim = c * n;
  m.out_dim = c * 2 * n;
  m.norm_bound = g1.norm_bound;
  m.apply = [g1, n, c](const Vec& v) {
    Vec out(static_cast<Eigen::Index>(c) * 2 * n);
    for (int k = 0; k < c; ++k)
      out.segment(static_cast<Eigen::Index>(k) * 2 * n, 2 * n) =
          g1.apply(v.segment(static_cast<Eigen::Index>(k) * n, n));
    return out;
  };
  m.adjoint = [g1, n, c](const Vec& p) {
    Vec out(static_cast<Eigen::Index>(c) * n);
    for (int k = 0; k < c; ++k)
      out.segment(static_cast<Eigen::Index>(k) * n, n) =
          g1.adjoint(p.segment(static_cast<Eigen::Index>(k) * 2 * n, 2 * n));
    return out;
  };
  return m;
}

Vec sign_vec(const Vec& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

}  // namespace

Vec field_flatten(const Field& f) {
  const int n = static_cast<int>(f[0].size());
  Vec v(static_cast<Eigen::Index>(f.size()) * n);
  for (size_t k = 0; k < f.size(); ++k)
    v.segment(static_cast<Eigen::Index>(k) * n, n) = flatten(f[k]);
  return v;
}

Field field_unflatten(const Vec& v, int h, int w, int c) {
  Field f;
  const int n = h * w;
  for (int k = 0; k < c; ++k)
    f.push_back(unflatten(v.segment(static_cast<Eigen::Index>(k) * n, n), h, w));
  return f;
}

LinearPotential LinearPotential::zeros(int classes, int in_channels, int side) {
  LinearPotential p;
  p.classes = classes;
  p.in_channels = in_channels;
  p.side = side;
  p.kernels.assign(classes,
                   std::vector<Mat>(in_channels, Mat::Zero(side, side)));
  p.bias = Vec::Zero(classes);
  return p;
}

Field LinearPotential::apply(const std::vector<Mat>& image) const {
  if (static_cast<int>(image.size()) != in_channels) {
    throw std::invalid_argument("LinearPotential: channel mismatch");
  }
  Field out;
  for (int c = 0; c < classes; ++c) {
    Mat acc = Mat::Constant(image[0].rows(), image[0].cols(), bias[c]);
    for (int ch = 0; ch < in_channels; ++ch) {
      acc += conv_apply(kernels[c][ch], image[ch]);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

Vec LinearPotential::pack() const {
  const int ks = side * side;
  Vec v(static_cast<Eigen::Index>(classes) * in_channels * ks + classes);
  Eigen::Index at = 0;
  for (int c = 0; c < classes; ++c)
    for (int ch = 0; ch < in_channels; ++ch) {
      v.segment(at, ks) = Eigen::Map<const Vec>(kernels[c][ch].data(), ks);
      at += ks;
    }
  v.tail(classes) = bias;
  return v;
}

LinearPotential LinearPotential::unpack(const Vec& v, int classes,
                                        int in_channels, int side) {
  LinearPotential p = zeros(classes, in_channels, side);
  const int ks = side * side;
  Eigen::Index at = 0;
  for (int c = 0; c < classes; ++c)
    for (int ch = 0; ch < in_channels; ++ch) {
      p.kernels[c][ch] = Eigen::Map<const Mat>(v.data() + at, side, side);
      at += ks;
    }
  p.bias = v.tail(classes);
  return p;
}

Field smooth_labels(const Field& onehot, double eps) {
  const int c = static_cast<int>(onehot.size());
  Field out = onehot;
  for (int k = 0; k < c; ++k) {
    out[k] = onehot[k].unaryExpr([&](double v) {
      return v > 0.5 ? 1.0 - eps : eps / (c - 1);
    });
  }
  return out;
}

Field seg_inference_from_potential(const Field& potential, double lambda,
                                   const SolverConfig& config) {
  const int h = static_cast<int>(potential[0].rows());
  const int w = static_cast<int>(potential[0].cols());
  const int c = static_cast<int>(potential.size());
  const int n = h * w;
  Vec nvec = field_flatten(potential);

  SaddleProblem sp;
  sp.k = field_grad_map(h, w, c);
  sp.dual_prox = [lambda](const Vec& p, double) {
    return p.cwiseMax(-lambda).cwiseMin(lambda);
  };
  // entropy Bregman primal step, closed form per pixel:
  // log x = (log xbar - tau (kty - N)) / (1 + tau), then normalize
  sp.primal_step = [nvec, n, c](const Vec& xbar, const Vec& kty, double tau) {
    Vec lx = (xbar.array().max(kFloor).log() - tau * (kty - nvec).array()) /
             (1.0 + tau);
    return field_softmax(lx, n, c);
  };
  sp.x0 = Vec::Constant(static_cast<Eigen::Index>(c) * n, 1.0 / c);
  sp.p0 = Vec::Zero(sp.k.out_dim);

  SaddleResult r = primal_dual(sp, config);
  return field_unflatten(r.x, h, w, c);
}

Field seg_inference(const LinearPotential& pot, const std::vector<Mat>& image,
                    double lambda, const SolverConfig& config) {
  if (lambda < 0.0) throw std::invalid_argument("seg_inference: lambda < 0");
  return seg_inference_from_potential(pot.apply(image), lambda, config);
}

namespace {

struct SegObjective {
  double value = 0.0;
  Vec dpotential;   // gradient w.r.t. the potential output field
  Vec ddual;        // gradient w.r.t. p (empty when absent/fixed)
};

// Shared evaluation of the surrogate family at a fixed potential output.
// anchor == nullptr means anchor = smoothed labels (Bregman case, g = 0).
SegObjective seg_objective_at(const Vec& nvec, const Vec& xs, const Vec* anchor,
                              const Vec& p, bool p_free, double lambda,
                              const LinearMap& d, int n, int c) {
  SegObjective out;
  Vec dtp = p.size() > 0 ? d.adjoint(p) : Vec::Zero(nvec.size());

  if (anchor) {
    const Vec& xb = *anchor;
    Vec g = 1.0 - (xs.array() / xb.array().max(kFloor));
    Vec a = g + nvec - dtp;
    double kl = 0.0;
    for (int i = 0; i < xs.size(); ++i) {
      kl += xs[i] * (std::log(std::max(xs[i], kFloor)) -
                     std::log(std::max(xb[i], kFloor)));
    }
    const double cconst = kl - g.dot(xb);
    out.value = field_lse_sum(a, n, c) - nvec.dot(xb) + entropy_of(xb) +
                lambda * d.apply(xb).lpNorm<1>() + cconst;
    Vec s = field_softmax(a, n, c);
    out.dpotential = s - xb;
    if (p_free) out.ddual = -d.apply(s);
  } else {
    Vec a = nvec - dtp;
    out.value = field_lse_sum(a, n, c) - nvec.dot(xs) + entropy_of(xs) +
                lambda * d.apply(xs).lpNorm<1>();
    Vec s = field_softmax(a, n, c);
    out.dpotential = s - xs;
    if (p_free) out.ddual = -d.apply(s);
  }
  return out;
}

}  // namespace

double seg_surrogate_gradient(const Field& potential, const Field& labels,
                              const Vec& p, const Field* anchor, double lambda,
                              Vec* dpotential) {
  const int h = static_cast<int>(potential[0].rows());
  const int w = static_cast<int>(potential[0].cols());
  const int c = static_cast<int>(potential.size());
  const int n = h * w;
  LinearMap d = field_grad_map(h, w, c);
  Vec nvec = field_flatten(potential);
  Vec xs = field_flatten(smooth_labels(labels));
  Vec xb;
  if (anchor) xb = field_flatten(*anchor);
  SegObjective obj = seg_objective_at(nvec, xs, anchor ? &xb : nullptr, p,
                                      false, lambda, d, n, c);
  if (dpotential) *dpotential = obj.dpotential;
  return obj.value;
}

SegSurrogateResult seg_bregman_surrogate(const LinearPotential& pot,
                                         const LabeledPair& pair, double lambda,
                                         const SolverConfig& config) {
  const int h = static_cast<int>(pair.image[0].rows());
  const int w = static_cast<int>(pair.image[0].cols());
  const int c = static_cast<int>(pair.labels.size());
  const int n = h * w;
  LinearMap d = field_grad_map(h, w, c);
  Vec nvec = field_flatten(pot.apply(pair.image));
  Vec xs = field_flatten(smooth_labels(pair.labels));

  SegSurrogateResult out;
  if (lambda == 0.0) {
    Vec p;
    out.value = seg_objective_at(nvec, xs, nullptr, p, false, 0.0, d, n, c).value;
    return out;
  }

  ProxGradProblem pg;
  pg.f = [&](const Vec& p) {
    return seg_objective_at(nvec, xs, nullptr, p, false, lambda, d, n, c).value;
  };
  pg.grad_f = [&](const Vec& p) {
    return seg_objective_at(nvec, xs, nullptr, p, true, lambda, d, n, c).ddual;
  };
  pg.prox_g = [lambda](const Vec& p, double) {
    return p.cwiseMax(-lambda).cwiseMin(lambda);
  };
  pg.lipschitz = 8.0;   // ||D||^2 <= 8 and the softmax Jacobian is <= 1
  pg.x0 = Vec::Zero(d.out_dim);
  ProxGradResult r = prox_gradient(pg, config);
  out.value = pg.f(r.x);
  out.dual = r.x;
  return out;
}

double seg_partial_surrogate(const LinearPotential& pot,
                             const LabeledPair& pair, double lambda) {
  const int h = static_cast<int>(pair.image[0].rows());
  const int w = static_cast<int>(pair.image[0].cols());
  const int c = static_cast<int>(pair.labels.size());
  const int n = h * w;
  LinearMap d = field_grad_map(h, w, c);
  Vec nvec = field_flatten(pot.apply(pair.image));
  Vec xs = field_flatten(smooth_labels(pair.labels));
  Vec p = lambda * sign_vec(d.apply(xs));
  return seg_objective_at(nvec, xs, nullptr, p, false, lambda, d, n, c).value;
}

SegSurrogateResult seg_iterative_surrogate(const LinearPotential& pot,
                                           const LabeledPair& pair,
                                           const Field& anchor, double lambda,
                                           const SolverConfig& config) {
  const int h = static_cast<int>(pair.image[0].rows());
  const int w = static_cast<int>(pair.image[0].cols());
  const int c = static_cast<int>(pair.labels.size());
  const int n = h * w;
  Vec xb = field_flatten(anchor);
  if (xb.minCoeff() <= 0.0) {
    throw std::invalid_argument("seg_iterative_surrogate: anchor has zeros");
  }
  LinearMap d = field_grad_map(h, w, c);
  Vec nvec = field_flatten(pot.apply(pair.image));
  Vec xs = field_flatten(smooth_labels(pair.labels));

  SegSurrogateResult out;
  if (lambda == 0.0) {
    Vec p;
    out.value = seg_objective_at(nvec, xs, &xb, p, false, 0.0, d, n, c).value;
    return out;
  }
  ProxGradProblem pg;
  pg.f = [&](const Vec& p) {
    return seg_objective_at(nvec, xs, &xb, p, false, lambda, d, n, c).value;
  };
  pg.grad_f = [&](const Vec& p) {
    return seg_objective_at(nvec, xs, &xb, p, true, lambda, d, n, c).ddual;
  };
  pg.prox_g = [lambda](const Vec& p, double) {
    return p.cwiseMax(-lambda).cwiseMin(lambda);
  };
  pg.lipschitz = 8.0;
  pg.x0 = Vec::Zero(d.out_dim);
  ProxGradResult r = prox_gradient(pg, config);
  out.value = pg.f(r.x);
  out.dual = r.x;
  return out;
}

double accuracy_hard_argmax(const Field& pred, const Field& labels) {
  const int c = static_cast<int>(pred.size());
  if (labels.size() != pred.size() || pred[0].rows() != labels[0].rows() ||
      pred[0].cols() != labels[0].cols()) {
    throw std::invalid_argument("accuracy_hard_argmax: shape mismatch");
  }
  const int h = static_cast<int>(pred[0].rows());
  const int w = static_cast<int>(pred[0].cols());
  int hits = 0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      int pa = 0, la = 0;
      for (int k = 1; k < c; ++k) {
        if (pred[k](i, j) > pred[pa](i, j)) pa = k;   // ties keep lowest index
        if (labels[k](i, j) > labels[la](i, j)) la = k;
      }
      if (pa == la) ++hits;
    }
  }
  return static_cast<double>(hits) / (h * w);
}

namespace {

struct SegTrainer {
  const std::vector<LabeledPair>* corpus;
  SegKind kind;
  double lambda;
  SegTrainConfig config;
  int h, w, c, n, in_channels;
  LinearMap d;
  Eigen::Index theta_len, dual_len;
  std::vector<Vec> nvec_cache_xs;       // smoothed labels per sample
  std::vector<Vec> fixed_duals;         // partial kind

  bool has_free_dual() const {
    return lambda > 0.0 &&
           (kind == SegKind::Bregman || kind == SegKind::Iterative);
  }

  // packed variable: [theta; p_1; ...; p_N] (duals only when free)
  Eigen::Index packed_len() const {
    return theta_len +
           (has_free_dual() ? static_cast<Eigen::Index>(corpus->size()) * dual_len
                            : 0);
  }

  double eval(const Vec& v, Vec* grad, const std::vector<Vec>* anchors) const {
    LinearPotential pot = LinearPotential::unpack(v.head(theta_len), c,
                                                  in_channels);
    double value = 0.0;
    if (grad) grad->setZero(v.size());
    for (size_t i = 0; i < corpus->size(); ++i) {
      Vec nv = field_flatten(pot.apply((*corpus)[i].image));
      const Vec& xs = nvec_cache_xs[i];
      Vec p;
      if (has_free_dual()) {
        p = v.segment(theta_len + static_cast<Eigen::Index>(i) * dual_len,
                      dual_len);
      } else if (kind == SegKind::Partial) {
        p = fixed_duals[i];
      }
      const Vec* anchor =
          anchors && kind == SegKind::Iterative ? &(*anchors)[i] : nullptr;
      double lam = kind == SegKind::CrossEntropy ? 0.0 : lambda;
      SegObjective obj = seg_objective_at(nv, xs, anchor, p,
                                          grad && has_free_dual(), lam, d, n, c);
      value += obj.value;
      if (grad) {
        // chain rule through the linear convolutional potential
        Field gfield = field_unflatten(obj.dpotential, h, w, c);
        Eigen::Index at = 0;
        const int ks = 9;
        for (int cc = 0; cc < c; ++cc) {
          for (int ch = 0; ch < in_channels; ++ch) {
            Mat kg = kernel_gradient((*corpus)[i].image[ch], gfield[cc], 3);
            grad->segment(at, ks) += Eigen::Map<const Vec>(kg.data(), ks);
            at += ks;
          }
        }
        for (int cc = 0; cc < c; ++cc) {
          (*grad)[theta_len - this->c + cc] += gfield[cc].sum();
        }
        if (has_free_dual()) {
          grad->segment(theta_len + static_cast<Eigen::Index>(i) * dual_len,
                        dual_len) += obj.ddual;
        }
      }
    }
    return value;
  }

  Vec run_fista(Vec v0, int iters, double lipschitz,
                const std::vector<Vec>* anchors) const {
    ProxGradProblem pg;
    pg.f = [this, anchors](const Vec& v) { return eval(v, nullptr, anchors); };
    pg.grad_f = [this, anchors](const Vec& v) {
      Vec g;
      eval(v, &g, anchors);
      return g;
    };
    const double lam = lambda;
    const Eigen::Index tl = theta_len;
    pg.prox_g = [lam, tl](const Vec& v, double) {
      Vec out = v;
      if (out.size() > tl) {
        auto tail = out.tail(out.size() - tl);
        tail = tail.cwiseMax(-lam).cwiseMin(lam);
      }
      return out;
    };
    pg.lipschitz = lipschitz;
    pg.x0 = std::move(v0);
    SolverConfig sc;
    sc.max_iter = iters;
    sc.tol = 0.0;   // fixed iteration budget per epoch
    return prox_gradient(pg, sc).x;
  }

  double corpus_accuracy(const LinearPotential& pot) const {
    double lam = kind == SegKind::CrossEntropy ? 0.0 : lambda;
    double acc = 0.0;
    for (const auto& pair : *corpus) {
      Field pred = seg_inference(pot, pair.image, lam, config.inference);
      acc += accuracy_hard_argmax(pred, pair.labels);
    }
    return acc / static_cast<double>(corpus->size());
  }

  double corpus_loss(const std::vector<Vec>& xs_fields) const {
    BregmanGenerator gen = BregmanGenerator::entropy();
    double s = 0.0;
    for (size_t i = 0; i < corpus->size(); ++i) {
      s += gen.value(nvec_cache_xs[i], xs_fields[i]);
    }
    return s;
  }
};

SegTrainer make_trainer(const std::vector<LabeledPair>& corpus, SegKind kind,
                        double lambda, const SegTrainConfig& config) {
  SegTrainer t;
  t.corpus = &corpus;
  t.kind = kind;
  t.lambda = lambda;
  t.config = config;
  t.h = static_cast<int>(corpus[0].image[0].rows());
  t.w = static_cast<int>(corpus[0].image[0].cols());
  t.c = static_cast<int>(corpus[0].labels.size());
  t.n = t.h * t.w;
  t.in_channels = static_cast<int>(corpus[0].image.size());
  t.d = field_grad_map(t.h, t.w, t.c);
  t.theta_len = static_cast<Eigen::Index>(t.c) * t.in_channels * 9 + t.c;
  t.dual_len = static_cast<Eigen::Index>(t.c) * 2 * t.n;
  for (const auto& pair : corpus) {
    t.nvec_cache_xs.push_back(field_flatten(smooth_labels(pair.labels)));
  }
  if (kind == SegKind::Partial) {
    for (const auto& xs : t.nvec_cache_xs) {
      t.fixed_duals.push_back(lambda * sign_vec(t.d.apply(xs)));
    }
  }
  return t;
}

}  // namespace

SegTrainResult train_segmentation(const std::vector<LabeledPair>& corpus,
                                  SegKind kind, double lambda,
                                  const SegTrainConfig& config) {
  if (corpus.empty()) throw std::invalid_argument("train_segmentation: empty corpus");
  SegTrainer t = make_trainer(corpus, kind, lambda, config);

  SegTrainResult out;
  Vec v = Vec::Zero(t.packed_len());

  if (kind != SegKind::Iterative) {
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      v = t.run_fista(v, config.fista_per_epoch, 1.0, nullptr);
      out.accuracy_trace.push_back(t.corpus_accuracy(
          LinearPotential::unpack(v.head(t.theta_len), t.c, t.in_channels)));
    }
    out.potential = LinearPotential::unpack(v.head(t.theta_len), t.c,
                                            t.in_channels);
    return out;
  }

  // guarded iterative scheme; round 1 (anchors = x*) is the Bregman surrogate
  auto packed = std::make_shared<Vec>(v);
  IterativeModel model;
  model.minimize_surrogate = [&t, &config, packed](
                                 const Vec& theta,
                                 const std::vector<Vec>& anchors, double tau,
                                 int /*steps*/) {
    Vec v0 = *packed;
    v0.head(t.theta_len) = theta;
    const std::vector<Vec>* aptr = anchors.empty() ? nullptr : &anchors;
    // smaller tau means a more conservative initial Lipschitz estimate
    const double lip = 0.1 / std::max(tau, 1e-12);
    if (!aptr) {
      // anchors = smoothed ground truth: plain Bregman round
      SegTrainer tb = t;
      tb.kind = SegKind::Bregman;
      for (int e = 0; e < config.epochs; ++e)
        v0 = tb.run_fista(v0, config.fista_per_epoch, lip, nullptr);
    } else {
      for (int e = 0; e < config.epochs; ++e)
        v0 = t.run_fista(v0, config.fista_per_epoch, lip, aptr);
    }
    *packed = v0;
    const double val = t.eval(v0, nullptr, aptr);
    return std::make_pair(Vec(v0.head(t.theta_len)), val);
  };
  model.solve_lower = [&t, &config](const Vec& theta) {
    LinearPotential pot =
        LinearPotential::unpack(theta, t.c, t.in_channels);
    std::vector<Vec> xs;
    for (const auto& pair : *t.corpus) {
      xs.push_back(field_flatten(
          seg_inference(pot, pair.image, t.lambda, config.inference)));
    }
    return xs;
  };
  model.loss = [&t](const std::vector<Vec>& xs) { return t.corpus_loss(xs); };

  IterativeConfig ic;
  ic.max_outer = config.outer_rounds;
  ic.tau0 = 0.1;
  IterationState state =
      iterative_train(model, Vec(Vec::Zero(t.theta_len)), ic);

  out.potential = LinearPotential::unpack(state.theta, t.c, t.in_channels);
  out.loss_trace = state.loss_trace;
  for (const auto& rec : state.records) {
    (void)rec;
  }
  out.accuracy_trace.push_back(t.corpus_accuracy(out.potential));
  return out;
}

std::vector<LabeledPair> synth_corpus(unsigned seed, int count, int h, int w,
                                      int classes, double noise) {
  if (classes < 2) throw std::invalid_argument("synth_corpus: classes < 2");
  std::mt19937_64 rng(seed);
  auto unif = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  auto gauss = [&](double sigma) {
    const double u1 = std::max(unif(0.0, 1.0), 1e-16);
    const double u2 = unif(0.0, 1.0);
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  auto color = [](int c, int ch) {
    double v = 0.37 * (c + 1) + 0.29 * ch;
    return 0.15 + 0.7 * (v - std::floor(v));
  };

  std::vector<LabeledPair> corpus;
  for (int img = 0; img < count; ++img) {
    Eigen::MatrixXi label = Eigen::MatrixXi::Zero(h, w);
    // one rectangle per non-background class so every class is present,
    // plus a few extras
    const int rects = classes - 1 + 3;
    for (int r = 0; r < rects; ++r) {
      const int cls = r < classes - 1 ? r + 1 : 1 + static_cast<int>(
                                                        unif(0.0, classes - 1));
      const int rh = 2 + static_cast<int>(unif(0.0, h / 2.0));
      const int rw = 2 + static_cast<int>(unif(0.0, w / 2.0));
      const int ri = static_cast<int>(unif(0.0, h - rh));
      const int rj = static_cast<int>(unif(0.0, w - rw));
      for (int i = ri; i < ri + rh; ++i)
        for (int j = rj; j < rj + rw; ++j)
          label(i, j) = std::min(cls, classes - 1);
    }

    LabeledPair pair;
    for (int ch = 0; ch < 3; ++ch) {
      Mat m(h, w);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          m(i, j) = std::clamp(color(label(i, j), ch) + gauss(noise), 0.0, 1.0);
      pair.image.push_back(std::move(m));
    }
    for (int c = 0; c < classes; ++c) {
      Mat m = Mat::Zero(h, w);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          if (label(i, j) == c) m(i, j) = 1.0;
      pair.labels.push_back(std::move(m));
    }
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace pmaj
