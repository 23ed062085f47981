#pragma once

#include <vector>

#include "pmaj/filterbank.hpp"
#include "pmaj/surrogates.hpp"

namespace pmaj {

// Paired clean/noisy patches, [0,255] floats, noisy values unclipped.
struct PatchCorpus {
  std::vector<Mat> clean;
  std::vector<Mat> noisy;
  int side = 0;
};

struct DenoiseConfig {
  double sigma = 25.0;              // noise std on the 0..255 scale
  int outer_budget = 4;             // iterative-scheme rounds
  SolverConfig inference;           // lower-level primal-dual budget
  double init_scale = 0.01;         // orthogonal init factor (0.001 for f=9)

  DenoiseConfig() {
    inference.max_iter = 500;
    inference.tol = 1e-6;
  }
};

struct FilterTrainConfig {
  double tau = 0.1;                 // Adam step size
  int epochs = 40;
  int steps_per_epoch = 25;
  int max_halvings = 8;             // epoch-level step-size backtracking
};

// 10 log10(255^2 / MSE); +inf for identical images.
double psnr(const Mat& x, const Mat& ref);

// Solve min_x 1/2||x - y||^2 + sum_k ||w_k (*) x||_1 via accelerated
// primal-dual (the fidelity is 1-strongly convex).
Mat denoise(const FilterBank& bank, const Mat& y,
            const SolverConfig& config = DenoiseConfig().inference);

// TV denoising with weight alpha (anisotropic, forward differences).
Mat tv_denoise(const Mat& y, double alpha,
               const SolverConfig& config = DenoiseConfig().inference);

struct TvBaselineResult {
  double alpha = 0.0;
  double psnr = 0.0;
};

// Grid search for the PSNR-maximizing TV weight with one refinement level.
TvBaselineResult tv_baseline(const PatchCorpus& corpus, double alpha_lo,
                             double alpha_hi, int points,
                             const SolverConfig& config = DenoiseConfig().inference);

struct EpochRecord {
  int epoch = 0;
  double tau = 0.0;
  double objective = 0.0;
};

// Exact constant-corrected surrogate objective
//   sum_i 1/2||xb_i - y_i||^2 + ||D xb_i||_1
//         + 1/2||D^T p_i - (y_i + g_i)||^2 - 1/2||y_i||^2 + C_i
// evaluated at the current duals; anchors xb_i = x*_i (g_i = 0, C_i = 0) for
// the single-shot Bregman surrogate.
double filter_surrogate_objective(const FilterBank& bank,
                                  const PatchCorpus& corpus,
                                  const std::vector<Vec>& duals,
                                  const std::vector<Mat>* anchors = nullptr);

// Same objective with its analytic gradients: dcoeff receives the derivative
// w.r.t. the coefficient matrix, dduals (optional) the per-sample derivative
// w.r.t. the duals.
double filter_surrogate_gradient(const FilterBank& bank,
                                 const PatchCorpus& corpus,
                                 const std::vector<Vec>& duals, Mat* dcoeff,
                                 std::vector<Vec>* dduals = nullptr,
                                 const std::vector<Mat>* anchors = nullptr);

struct FilterTrainResult {
  FilterBank bank;
  std::vector<EpochRecord> epochs;
  std::vector<Vec> duals;           // final p_i, warm starts for later rounds
};

// Joint projected-Adam minimization of the surrogate over (theta, {p_i}),
// duals clipped to the componentwise unit ball. Epoch objective is monotone
// under step-size backtracking.
FilterTrainResult train_filters_surrogate(
    const PatchCorpus& corpus, const FilterBank& bank0,
    const FilterTrainConfig& config = {},
    const std::vector<Mat>* anchors = nullptr,
    const std::vector<Vec>* warm_duals = nullptr);

struct DenoiseReport {
  double psnr_single = 0.0;
  double psnr_iterative = 0.0;
  double seconds = 0.0;
  std::vector<double> loss_trace;    // guarded train-loss trace
  std::vector<EpochRecord> epochs;
  FilterBank bank;
};

// Single surrogate training (anchors = x*) followed by the guarded iterative
// scheme; held-out PSNR recorded after each stage.
DenoiseReport run_iterative_denoise_training(const PatchCorpus& train,
                                             const PatchCorpus& heldout,
                                             const FilterBank& bank0,
                                             const DenoiseConfig& config = {},
                                             const FilterTrainConfig& tconfig = {});

}  // namespace pmaj
