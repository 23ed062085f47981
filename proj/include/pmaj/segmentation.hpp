#pragma once

#include <vector>

#include "pmaj/filterbank.hpp"
#include "pmaj/solvers.hpp"
#include "pmaj/surrogates.hpp"

namespace pmaj {

// Per-pixel class-probability field: C matrices of shape H x W, each pixel's
// class vector on the unit simplex. Flattened layout is class-major:
// index = c * (H*W) + pixel.
using Field = std::vector<Mat>;

Vec field_flatten(const Field& f);
Field field_unflatten(const Vec& v, int h, int w, int c);

// Per-class convolution kernels (3x3 x input channels) plus per-class bias.
struct LinearPotential {
  int classes = 0;
  int in_channels = 0;
  int side = 3;
  std::vector<std::vector<Mat>> kernels;   // [class][channel], side x side
  Vec bias;

  static LinearPotential zeros(int classes, int in_channels, int side = 3);
  Field apply(const std::vector<Mat>& image) const;

  Vec pack() const;
  static LinearPotential unpack(const Vec& v, int classes, int in_channels,
                                int side = 3);
};

struct LabeledPair {
  std::vector<Mat> image;   // channels, [0,1] floats
  Field labels;             // one-hot per pixel
};

// One-hot labels moved off the simplex boundary: 1-eps / eps/(C-1).
Field smooth_labels(const Field& onehot, double eps = 1e-3);

// Lower level argmin_x -<N,x> + lambda ||Dx||_1 + h(x) via primal-dual with
// entropy Bregman primal steps; at lambda = 0 the output is softmax(N).
Field seg_inference(const LinearPotential& pot, const std::vector<Mat>& image,
                    double lambda, const SolverConfig& config = {});

Field seg_inference_from_potential(const Field& potential, double lambda,
                                   const SolverConfig& config = {});

struct SegSurrogateResult {
  double value = 0.0;
  Vec dual;   // attaining p (empty when fixed or absent)
};

// Exact dual Bregman surrogate
//   h(x*) - <N,x*> + lambda ||Dx*||_1 + min_{||p||_inf <= lambda} h*(N - D^T p)
SegSurrogateResult seg_bregman_surrogate(const LinearPotential& pot,
                                         const LabeledPair& pair, double lambda,
                                         const SolverConfig& config = {});

// Frozen dual p = lambda sign(Dx*); an upper bound on the Bregman surrogate.
double seg_partial_surrogate(const LinearPotential& pot,
                             const LabeledPair& pair, double lambda);

// Iterative surrogate at a strictly positive anchor field.
SegSurrogateResult seg_iterative_surrogate(const LinearPotential& pot,
                                           const LabeledPair& pair,
                                           const Field& anchor, double lambda,
                                           const SolverConfig& config = {});

// Surrogate value at a fixed dual point with the analytic gradient w.r.t. the
// potential field (labels smoothed internally; anchor nullptr = labels).
double seg_surrogate_gradient(const Field& potential, const Field& labels,
                              const Vec& p, const Field* anchor, double lambda,
                              Vec* dpotential);

double accuracy_hard_argmax(const Field& pred, const Field& labels);

enum class SegKind { CrossEntropy, Bregman, Partial, Iterative };

struct SegTrainConfig {
  int epochs = 12;
  int fista_per_epoch = 25;
  int outer_rounds = 4;            // iterative kind
  SolverConfig inference;
  SegTrainConfig() {
    inference.max_iter = 300;
    inference.tol = 1e-8;
  }
};

struct SegTrainResult {
  LinearPotential potential;
  std::vector<double> accuracy_trace;   // per epoch, hard argmax
  std::vector<double> loss_trace;       // guarded trace (iterative kind)
};

SegTrainResult train_segmentation(const std::vector<LabeledPair>& corpus,
                                  SegKind kind, double lambda,
                                  const SegTrainConfig& config = {});

// Deterministic piecewise-constant labels with noisy color observations.
std::vector<LabeledPair> synth_corpus(unsigned seed, int count, int h, int w,
                                      int classes, double noise = 0.12);

}  // namespace pmaj
