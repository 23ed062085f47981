#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmaj/denoise.hpp"
#include "pmaj/io.hpp"
#include "pmaj/segmentation.hpp"
#include "pmaj/surrogates.hpp"
#include "pmaj/toy1d.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace pmaj;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 7;
  std::string out = ".";
  json cfg = json::object();

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--seed", seed, "PRNG seed");
    app->add_option("--out", out, "output directory");
  }

  // config file fills in anything not given on the command line
  void finalize(CLI::App* app) {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
      in >> cfg;
      if (app->count("--seed") == 0 && cfg.contains("seed"))
        seed = cfg["seed"].get<std::uint64_t>();
      if (app->count("--out") == 0 && cfg.contains("out"))
        out = cfg["out"].get<std::string>();
    }
    fs::create_directories(out);
  }

  template <typename T>
  T value(const std::string& key, T fallback) const {
    return cfg.contains(key) ? cfg[key].get<T>() : fallback;
  }
};

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

SplitCorpus denoise_corpus(const Common& c) {
  const int side = c.value("patch_side", 64);
  const int count = c.value("patch_count", 32);
  const double sigma = c.value("sigma", 25.0);
  Mat img = synth_image(c.value("image_h", 192), c.value("image_w", 256),
                        c.seed);
  return extract_patches(img, side, count, sigma, c.seed + 1);
}

json bank_to_json(const FilterBank& bank) {
  json j;
  j["filters"] = bank.filters;
  j["side"] = bank.side;
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < bank.coeff.rows(); ++k) {
    std::vector<double> r(bank.coeff.cols());
    for (int c = 0; c < bank.coeff.cols(); ++c) r[c] = bank.coeff(k, c);
    rows.push_back(std::move(r));
  }
  j["coeff"] = rows;
  return j;
}

FilterBank bank_from_json(const json& j) {
  FilterBank bank = FilterBank::zeros(j["filters"].get<int>(),
                                      j["side"].get<int>());
  const auto rows = j["coeff"].get<std::vector<std::vector<double>>>();
  for (size_t k = 0; k < rows.size(); ++k)
    for (size_t c = 0; c < rows[k].size(); ++c)
      bank.coeff(static_cast<int>(k), static_cast<int>(c)) = rows[k][c];
  return bank;
}

double corpus_psnr(const FilterBank& bank, const PatchCorpus& corpus,
                   const SolverConfig& cfg) {
  double acc = 0.0;
  for (size_t i = 0; i < corpus.noisy.size(); ++i)
    acc += psnr(denoise(bank, corpus.noisy[i], cfg), corpus.clean[i]);
  return acc / static_cast<double>(corpus.noisy.size());
}

SegKind parse_kind(const std::string& s) {
  if (s == "ce") return SegKind::CrossEntropy;
  if (s == "bregman") return SegKind::Bregman;
  if (s == "partial") return SegKind::Partial;
  if (s == "iterative") return SegKind::Iterative;
  throw CLI::ValidationError("--kind", "unknown kind " + s);
}

int run_toy_sweep(const Common& c) {
  ToyInstance inst;
  inst.xstar = c.value("xstar", 0.3);
  inst.y = c.value("y", 1.5);
  auto rows = toy_sweep(inst, linspace(c.value("theta_lo", 0.0),
                                       c.value("theta_hi", 3.0),
                                       c.value("points", 301)));
  Table t;
  t.columns = {"theta", "loss", "bregman", "partial", "gradient_penalty"};
  for (const auto& r : rows)
    t.rows.push_back({r.theta, r.s.loss, r.s.bregman, r.s.partial,
                      r.s.gradient_penalty});
  write_csv(c.out + "/toy_sweep.csv", t);
  std::cout << "wrote " << c.out << "/toy_sweep.csv (" << rows.size()
            << " rows)\n";
  return 0;
}

int run_toy_collapse(const Common& c) {
  std::vector<std::pair<double, double>> samples = {{0.3, 1.5}, {0.2, 1.0}};
  auto rows = collapse_sweep(samples, linspace(0.0, 3.0, c.value("points", 301)));
  Table t;
  t.columns = {"theta", "naive", "reformulated"};
  for (const auto& r : rows)
    t.rows.push_back({r.theta, r.naive, r.reformulated});
  write_csv(c.out + "/toy_collapse.csv", t);
  std::cout << "wrote " << c.out << "/toy_collapse.csv\n";
  return 0;
}

int run_check(const Common& c) {
  int failures = 0;
  auto report = [&failures](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  {  // pointwise surrogate ordering on the 1-D instance
    ToyInstance inst;
    bool ok = true;
    for (double theta : linspace(0.0, 3.0, 301)) {
      auto s = toy_surrogates_closed_form(inst, theta);
      ok = ok && s.loss <= s.bregman + 1e-9 && s.bregman <= s.partial + 1e-9 &&
           s.partial <= s.gradient_penalty + 1e-9;
    }
    report("surrogate ordering (1-D closed forms)", ok);
  }
  {  // guarded bi-level training recovers the known optimum
    SurrogateProblem p;
    p.samples.push_back({Vec::Constant(1, 0.3), Vec::Constant(1, 1.5)});
    IterationState st = iterative_train(p, 2.5);
    bool ok = std::abs(st.theta[0] - 1.2) <= 1e-3 &&
              st.loss_trace.back() <= 1e-6;
    for (size_t i = 1; i < st.loss_trace.size(); ++i)
      ok = ok && st.loss_trace[i] <= st.loss_trace[i - 1] + 1e-15;
    report("bi-level recovery and descent guard", ok);
  }
  {  // primal and dual evaluations of the exact surrogate agree
    Rng rng(c.seed);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const int n = 3;
      Vec y(n), xs(n);
      for (int i = 0; i < n; ++i) {
        y[i] = rng.gaussian(1.5);
        xs[i] = rng.gaussian(1.0);
      }
      SplitEnergy e = quadl1_energy(0.3 + rng.uniform(), y);
      SolverConfig sc;
      sc.max_iter = 20000;
      sc.tol = 1e-12;
      const double dual = bregman_surrogate_dual(e, xs, sc).value;
      const double primal = bregman_surrogate_primal(e, xs, sc);
      ok = std::abs(dual - primal) <= 1e-6 * std::max(1.0, std::abs(dual));
    }
    report("primal/dual surrogate agreement", ok);
  }
  {  // anchor at the ground truth reduces the re-linearized surrogate
    Rng rng(c.seed + 1);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const int n = 3;
      Vec y(n), xs(n);
      for (int i = 0; i < n; ++i) {
        y[i] = rng.gaussian(1.5);
        xs[i] = rng.gaussian(1.0);
      }
      SplitEnergy e = quadl1_energy(0.3 + rng.uniform(), y);
      SolverConfig sc;
      sc.max_iter = 20000;
      sc.tol = 1e-12;
      const double a =
          iterative_surrogate(e, BregmanGenerator::quadratic(), xs, xs, sc)
              .value;
      const double b = bregman_surrogate_dual(e, xs, sc).value;
      ok = std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
    }
    report("anchored surrogate reduction", ok);
  }
  {  // inference stays on the simplex
    auto corpus = synth_corpus(c.seed, 1, 8, 8, 3);
    LinearPotential pot = LinearPotential::zeros(3, 3);
    pot.bias << 0.3, -0.1, 0.4;
    Field x = seg_inference(pot, corpus[0].image, 0.1);
    bool ok = true;
    for (int i = 0; i < 8 && ok; ++i)
      for (int j = 0; j < 8; ++j) {
        double s = 0.0;
        for (const auto& ch : x) s += ch(i, j);
        if (std::abs(s - 1.0) > 1e-8) { ok = false; break; }
      }
    report("inference simplex feasibility", ok);
  }
  std::cout << (failures == 0 ? "all checks passed" : "checks FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

int run_denoise_train(const Common& c) {
  SplitCorpus corpus = denoise_corpus(c);
  const int filters = c.value("filters", 3);
  const int fside = c.value("filter_side", 3);
  DenoiseConfig dc;
  dc.sigma = c.value("sigma", 25.0);
  dc.outer_budget = c.value("outer_budget", 4);
  FilterTrainConfig tc;
  tc.epochs = c.value("epochs", 40);
  FilterBank bank0 = random_bank(filters, fside,
                                 fside >= 9 ? 0.001 : 0.01, c.seed + 2);
  DenoiseReport report = run_iterative_denoise_training(
      corpus.train, corpus.test, bank0, dc, tc);

  Table epochs;
  epochs.columns = {"epoch", "tau", "objective"};
  for (const auto& e : report.epochs)
    epochs.rows.push_back({static_cast<double>(e.epoch), e.tau, e.objective});
  write_csv(c.out + "/denoise_epochs.csv", epochs);

  Table trace;
  trace.columns = {"round", "loss"};
  for (size_t i = 0; i < report.loss_trace.size(); ++i)
    trace.rows.push_back({static_cast<double>(i), report.loss_trace[i]});
  write_csv(c.out + "/denoise_loss_trace.csv", trace);

  json j;
  j["filters"] = {{"K", filters}, {"f", fside}};
  j["psnr_single"] = report.psnr_single;
  j["psnr_iter"] = report.psnr_iterative;
  j["seconds"] = report.seconds;
  write_json(c.out + "/denoise_report.json", j);
  write_json(c.out + "/filters.json", bank_to_json(report.bank));
  std::cout << "psnr_single=" << report.psnr_single
            << " psnr_iter=" << report.psnr_iterative << "\n";
  return 0;
}

int run_denoise_eval(const Common& c, const std::string& filters_path) {
  std::ifstream in(filters_path);
  if (!in) {
    std::cerr << "cannot open " << filters_path << "\n";
    return 1;
  }
  json fj;
  in >> fj;
  FilterBank bank = bank_from_json(fj);
  SplitCorpus corpus = denoise_corpus(c);
  const double p = corpus_psnr(bank, corpus.test, DenoiseConfig().inference);
  json j;
  j["psnr"] = p;
  j["patches"] = corpus.test.noisy.size();
  write_json(c.out + "/denoise_eval.json", j);
  std::cout << "psnr=" << p << "\n";
  return 0;
}

int run_tv_baseline(const Common& c) {
  SplitCorpus corpus = denoise_corpus(c);
  TvBaselineResult r =
      tv_baseline(corpus.test, c.value("alpha_lo", 1.0),
                  c.value("alpha_hi", 60.0), c.value("alpha_points", 13));
  json j;
  j["alpha"] = r.alpha;
  j["psnr"] = r.psnr;
  write_json(c.out + "/tv_baseline.json", j);
  std::cout << "alpha=" << r.alpha << " psnr=" << r.psnr << "\n";
  return 0;
}

int run_segment_train(const Common& c, const std::string& kind_str) {
  auto corpus = synth_corpus(c.seed, c.value("images", 4),
                             c.value("seg_h", 64), c.value("seg_w", 128),
                             c.value("classes", 3));
  SegKind kind = parse_kind(kind_str);
  const double lambda = c.value("lambda", 1.0);
  SegTrainConfig tc;
  tc.epochs = c.value("epochs", 12);
  tc.outer_rounds = c.value("outer_rounds", 4);
  SegTrainResult r = train_segmentation(corpus, kind, lambda, tc);

  Table t;
  t.columns = {"epoch", "kind", "accuracy"};
  for (size_t e = 0; e < r.accuracy_trace.size(); ++e)
    t.rows.push_back({static_cast<double>(e + 1),
                      static_cast<double>(static_cast<int>(kind)),
                      r.accuracy_trace[e]});
  write_csv(c.out + "/segment_accuracy.csv", t);

  json j;
  j["kind"] = kind_str;
  j["lambda"] = lambda;
  j["final_accuracy"] = r.accuracy_trace.back();
  json pv = json::array();
  Vec packed = r.potential.pack();
  for (int i = 0; i < packed.size(); ++i) pv.push_back(packed[i]);
  j["classes"] = r.potential.classes;
  j["in_channels"] = r.potential.in_channels;
  j["potential"] = pv;
  write_json(c.out + "/segment_model.json", j);
  std::cout << "final accuracy " << r.accuracy_trace.back() << "\n";
  return 0;
}

int run_segment_eval(const Common& c, const std::string& model_path) {
  std::ifstream in(model_path);
  if (!in) {
    std::cerr << "cannot open " << model_path << "\n";
    return 1;
  }
  json mj;
  in >> mj;
  const auto packed = mj["potential"].get<std::vector<double>>();
  Vec v = Eigen::Map<const Vec>(packed.data(),
                                static_cast<Eigen::Index>(packed.size()));
  LinearPotential pot = LinearPotential::unpack(
      v, mj["classes"].get<int>(), mj["in_channels"].get<int>());
  const double lambda = mj.value("lambda", 1.0);
  auto corpus = synth_corpus(c.seed, c.value("images", 4),
                             c.value("seg_h", 64), c.value("seg_w", 128),
                             c.value("classes", 3));
  double acc = 0.0;
  for (const auto& pair : corpus) {
    Field pred = seg_inference(pot, pair.image, lambda);
    acc += accuracy_hard_argmax(pred, pair.labels);
  }
  acc /= static_cast<double>(corpus.size());
  json j;
  j["accuracy"] = acc;
  write_json(c.out + "/segment_eval.json", j);
  std::cout << "accuracy=" << acc << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-based training for energy-minimization models"};
  app.require_subcommand(1);

  Common common;

  auto* toy = app.add_subcommand("toy", "1-D reference problem");
  toy->require_subcommand(1);
  auto* toy_sweep_cmd = toy->add_subcommand("sweep", "surrogate sweep CSV");
  auto* toy_collapse_cmd =
      toy->add_subcommand("collapse", "energy-collapse demonstration CSV");

  auto* check = app.add_subcommand("check", "run the invariant suite");

  auto* denoise_cmd = app.add_subcommand("denoise", "filter learning");
  denoise_cmd->require_subcommand(1);
  auto* denoise_train_cmd = denoise_cmd->add_subcommand("train", "train filters");
  auto* denoise_eval_cmd = denoise_cmd->add_subcommand("eval", "evaluate filters");
  std::string filters_path = "filters.json";
  denoise_eval_cmd->add_option("--filters", filters_path, "filters JSON");

  auto* tv = app.add_subcommand("tv-baseline", "tuned TV reference");

  auto* segment = app.add_subcommand("segment", "segmentation training");
  segment->require_subcommand(1);
  auto* segment_train_cmd = segment->add_subcommand("train", "train potentials");
  std::string kind = "bregman";
  segment_train_cmd->add_option("--kind", kind,
                                "ce | bregman | partial | iterative");
  auto* segment_eval_cmd = segment->add_subcommand("eval", "evaluate a model");
  std::string model_path = "segment_model.json";
  segment_eval_cmd->add_option("--model", model_path, "model JSON");

  for (CLI::App* cmd :
       {toy_sweep_cmd, toy_collapse_cmd, check, denoise_train_cmd,
        denoise_eval_cmd, tv, segment_train_cmd, segment_eval_cmd}) {
    common.add_to(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (CLI::App* cmd :
         {toy_sweep_cmd, toy_collapse_cmd, check, denoise_train_cmd,
          denoise_eval_cmd, tv, segment_train_cmd, segment_eval_cmd}) {
      if (cmd->parsed()) common.finalize(cmd);
    }
    if (toy_sweep_cmd->parsed()) return run_toy_sweep(common);
    if (toy_collapse_cmd->parsed()) return run_toy_collapse(common);
    if (check->parsed()) return run_check(common);
    if (denoise_train_cmd->parsed()) return run_denoise_train(common);
    if (denoise_eval_cmd->parsed())
      return run_denoise_eval(common, filters_path);
    if (tv->parsed()) return run_tv_baseline(common);
    if (segment_train_cmd->parsed()) return run_segment_train(common, kind);
    if (segment_eval_cmd->parsed()) return run_segment_eval(common, model_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
