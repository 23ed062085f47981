#include "pmaj/surrogates.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

namespace pmaj {

namespace {

Vec sign_vec(const Vec& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

void warn_condition8_once() {
  static bool warned = false;
  if (!warned) {
    std::fprintf(stderr,
                 "[surrogates] warning: loss generator is not a structural "
                 "additive part of the energy; majorization is trusted\n");
    warned = true;
  }
}

}  // namespace

SurrogateResult inner_conjugate_min(const SplitEnergy& e, const Vec& g,
                                    const SolverConfig& config, const Vec* z0) {
  const EnergyAtom& e1 = e.e1;
  const EnergyAtom& e2 = e.e2;
  if (!e1.conjugate_smooth()) {
    throw std::invalid_argument("inner_conjugate_min: E1* must be smooth");
  }
  const bool e2_smooth = e2.conjugate_smooth();

  ProxGradProblem p;
  p.f = [&](const Vec& z) {
    double v = e1.conjugate(g - z);
    if (e2_smooth) v += e2.conjugate(z);
    return v;
  };
  p.grad_f = [&](const Vec& z) {
    Vec grad = -e1.conjugate_grad(g - z);
    if (e2_smooth) grad += e2.conjugate_grad(z);
    return grad;
  };
  if (!e2_smooth) {
    p.prox_g = [&](const Vec& z, double) { return e2.conjugate_domain_project(z); };
  } else {
    p.prox_g = [](const Vec& z, double) { return z; };
  }
  p.lipschitz = 1.0;
  p.x0 = z0 && z0->size() == e.dim()
             ? *z0
             : e2.conjugate_domain_project(Vec::Zero(e.dim()));

  ProxGradResult r = prox_gradient(p, config);
  SurrogateResult out;
  out.inner = r.x;
  out.residual = r.residual;
  out.value = e1.conjugate(g - r.x) + e2.conjugate(r.x);
  if (!r.converged && r.residual > 1e3 * config.tol) {
    throw SolverError("inner_conjugate_min: residual " +
                      std::to_string(r.residual));
  }
  return out;
}

SurrogateResult bregman_surrogate_dual(const SplitEnergy& e, const Vec& xstar,
                                       const SolverConfig& config) {
  SurrogateResult r = inner_conjugate_min(e, Vec::Zero(e.dim()), config);
  r.value += e.eval(xstar);
  return r;
}

double bregman_surrogate_primal(const SplitEnergy& e, const Vec& xstar,
                                const SolverConfig& config) {
  ProxGradProblem p;
  p.f = [&](const Vec& x) { return e.e1.eval(x); };
  p.grad_f = [&](const Vec& x) { return e.e1.subgradient(x); };
  p.g_value = [&](const Vec& x) { return e.e2.eval(x); };
  p.prox_g = [&](const Vec& x, double tau) { return e.e2.prox(x, tau); };
  p.lipschitz = 1.0;
  p.x0 = Vec::Zero(e.dim());
  if (e.e2.kind() == AtomKind::EntropySimplex) {
    p.x0 = Vec::Constant(e.dim(), 1.0 / e.dim());
  }
  ProxGradResult r = prox_gradient(p, config);
  return e.eval(xstar) - r.objective;
}

double partial_surrogate(const SplitEnergy& e, const Vec& xstar,
                         PartialSide side) {
  if (side == PartialSide::E2) {
    Vec z = e.e2.subgradient(xstar);
    return e.e1.w_gap(-z, xstar);
  }
  Vec r = e.e1.subgradient(xstar);
  return e.e2.w_gap(-r, xstar);
}

double gradient_penalty(const SplitEnergy& e, const Vec& xstar) {
  const double m = e.modulus();
  if (m <= 0.0) {
    throw std::invalid_argument(
        "gradient_penalty: energy is not strongly convex (m = 0)");
  }
  // 1/(2m) constant per the strong-smoothness bound D_{E*}(p,q) <= ||p-q||^2/(2m)
  return e.subgradient(xstar).squaredNorm() / (2.0 * m);
}

SurrogateResult iterative_surrogate(const SplitEnergy& e,
                                    const BregmanGenerator& loss,
                                    const Vec& xstar, const Vec& xbar,
                                    const SolverConfig& config, const Vec* z0) {
  Vec g = loss.grad_second(xstar, xbar);
  SurrogateResult r = inner_conjugate_min(e, g, config, z0);
  r.value += e.eval(xbar) + loss.value(xstar, xbar) - g.dot(xbar);
  return r;
}

SplitEnergy quadl1_energy(double theta, const Vec& y) {
  return SplitEnergy{EnergyAtom::quadratic(y),
                     EnergyAtom::weighted_l1(theta, static_cast<int>(y.size()))};
}

BatchEval surrogate_batch_objective(const SurrogateProblem& problem,
                                    double theta,
                                    const std::vector<Vec>& inner,
                                    const std::vector<Vec>& anchors) {
  if (problem.loss.kind() != BregmanGenerator::Kind::Quadratic) {
    warn_condition8_once();
  }
  const size_t n = problem.samples.size();
  const bool has_inner = problem.kind == SurrogateKind::BregmanDual ||
                         problem.kind == SurrogateKind::Iterative;
  if (has_inner && inner.size() != n) {
    throw std::invalid_argument("surrogate_batch_objective: inner/sample shape mismatch");
  }
  if (has_inner && anchors.size() != n) {
    throw std::invalid_argument("surrogate_batch_objective: anchors/sample shape mismatch");
  }

  BatchEval out;
  out.dinner.resize(has_inner ? n : 0);
  for (size_t i = 0; i < n; ++i) {
    const Vec& xs = problem.samples[i].xstar;
    const Vec& y = problem.samples[i].y;
    switch (problem.kind) {
      case SurrogateKind::GradientPenalty: {
        Vec s = sign_vec(xs);
        Vec q = (xs - y) + theta * s;
        out.value += 0.5 * q.squaredNorm();  // m = 1 for this family
        out.dtheta += q.dot(s);
        break;
      }
      case SurrogateKind::PartialE2: {
        Vec s = sign_vec(xs);
        // W_{E1}(-theta s, x*) with E1 = 1/2||.-y||^2, expanded analytically
        out.value += 0.5 * (xs - y).squaredNorm() +
                     0.5 * theta * theta * s.squaredNorm() +
                     theta * s.dot(xs - y);
        out.dtheta += theta * s.squaredNorm() + s.dot(xs - y);
        break;
      }
      case SurrogateKind::BregmanDual:
      case SurrogateKind::Iterative: {
        const Vec& xb = anchors[i];
        Vec g = Vec::Zero(xs.size());
        double cconst = 0.0;
        if (problem.kind == SurrogateKind::Iterative) {
          g = problem.loss.grad_second(xs, xb);
          cconst = problem.loss.value(xs, xb) - g.dot(xb);
        }
        const Vec& u = inner[i];
        Vec q = g - theta * u;           // argument of E1*
        Vec cg = q + y;                  // gradient of E1* at q
        out.value += 0.5 * (xb - y).squaredNorm() + theta * xb.lpNorm<1>() +
                     0.5 * q.squaredNorm() + q.dot(y) + cconst;
        out.dtheta += xb.lpNorm<1>() - u.dot(cg);
        out.dinner[i] = -theta * cg;
        break;
      }
      default:
        throw std::invalid_argument(
            "surrogate_batch_objective: kind has no joint minimization form");
    }
  }
  return out;
}

IterationState iterative_train(const IterativeModel& model, Vec theta0,
                               const IterativeConfig& config) {
  IterationState state;
  state.theta = std::move(theta0);
  state.tau = config.tau0;

  std::vector<Vec> xs = model.solve_lower(state.theta);
  state.anchors.clear();
  state.loss_trace.push_back(model.loss(xs));

  int rejects = 0;
  for (int outer = 1; outer <= config.max_outer; ++outer) {
    // anchors: ground truth on the first pass (Bregman surrogate), current
    // lower-level solutions afterwards
    const std::vector<Vec>& anchors = state.anchors;
    auto [theta_c, sval] = model.minimize_surrogate(
        state.theta, anchors, state.tau, config.surrogate_steps);
    std::vector<Vec> xs_c = model.solve_lower(theta_c);
    const double loss_c = model.loss(xs_c);

    if (loss_c <= state.loss_trace.back()) {
      state.theta = theta_c;
      state.anchors = xs_c;
      state.loss_trace.push_back(loss_c);
      state.records.push_back({outer, state.tau, sval, loss_c});
      rejects = 0;
      if (loss_c <= config.loss_tol) break;
    } else {
      ++rejects;
      ++state.reductions;
      state.tau *= 0.5;
      if (rejects >= config.rejection_budget) break;
    }
  }
  return state;
}

IterativeModel quadl1_model(const SurrogateProblem& problem) {
  auto warm = std::make_shared<std::vector<Vec>>();
  IterativeModel model;

  model.minimize_surrogate = [problem, warm](const Vec& theta,
                                             const std::vector<Vec>& anchors,
                                             double tau, int steps) {
    const size_t n = problem.samples.size();
    const int dim = static_cast<int>(problem.samples[0].xstar.size());

    SurrogateProblem p = problem;
    std::vector<Vec> anch;
    if (anchors.size() == n) {
      p.kind = SurrogateKind::Iterative;
      anch = anchors;
    } else {
      p.kind = SurrogateKind::BregmanDual;
      for (const auto& s : problem.samples) anch.push_back(s.xstar);
    }

    // scaled duals u_i, warm-started; closed-form seed u = clip((g+y)/theta)
    if (warm->size() != n) {
      warm->clear();
      for (size_t i = 0; i < n; ++i) {
        Vec g = Vec::Zero(dim);
        if (p.kind == SurrogateKind::Iterative) {
          g = p.loss.grad_second(p.samples[i].xstar, anch[i]);
        }
        Vec u = (g + p.samples[i].y) / std::max(theta[0], 1e-8);
        warm->push_back(u.cwiseMax(-1.0).cwiseMin(1.0));
      }
    }

    // pack [theta; u_1; ...; u_n]
    Vec v(1 + static_cast<Eigen::Index>(n) * dim);
    v[0] = theta[0];
    for (size_t i = 0; i < n; ++i) v.segment(1 + i * dim, dim) = (*warm)[i];

    auto vg = [&](const Vec& vv, Vec& grad) {
      std::vector<Vec> u(n);
      for (size_t i = 0; i < n; ++i) u[i] = vv.segment(1 + i * dim, dim);
      BatchEval be = surrogate_batch_objective(p, vv[0], u, anch);
      grad.resize(vv.size());
      grad[0] = be.dtheta;
      for (size_t i = 0; i < n; ++i)
        grad.segment(1 + i * dim, dim) =
            be.dinner.empty() ? Vec::Zero(dim) : be.dinner[i];
      return be.value;
    };
    auto project = [&](Vec& vv) {
      vv[0] = std::max(vv[0], 0.0);
      for (Eigen::Index i = 1; i < vv.size(); ++i)
        vv[i] = std::clamp(vv[i], -1.0, 1.0);
    };

    AdamConfig ac;
    ac.max_iter = steps;
    Vec vopt = adaptive_moment_descent(vg, v, tau, project, ac);

    for (size_t i = 0; i < n; ++i) (*warm)[i] = vopt.segment(1 + i * dim, dim);
    Vec gdummy;
    double val = vg(vopt, gdummy);
    Vec theta_out(1);
    theta_out[0] = vopt[0];
    return std::make_pair(theta_out, val);
  };

  model.solve_lower = [problem](const Vec& theta) {
    std::vector<Vec> xs;
    SolverConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iter = 5000;
    for (const auto& s : problem.samples) {
      SplitEnergy e = quadl1_energy(theta[0], s.y);
      ProxGradProblem p;
      p.f = [&](const Vec& x) { return e.e1.eval(x); };
      p.grad_f = [&](const Vec& x) { return e.e1.subgradient(x); };
      p.g_value = [&](const Vec& x) { return e.e2.eval(x); };
      p.prox_g = [&](const Vec& x, double tau) { return e.e2.prox(x, tau); };
      p.x0 = s.y;
      xs.push_back(prox_gradient(p, cfg).x);
    }
    return xs;
  };

  model.loss = [problem](const std::vector<Vec>& xs) {
    double s = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      s += problem.loss.value(problem.samples[i].xstar, xs[i]);
    }
    return s;
  };

  return model;
}

IterationState iterative_train(const SurrogateProblem& problem, double theta0,
                               const IterativeConfig& config) {
  Vec t0(1);
  t0[0] = theta0;
  return iterative_train(quadl1_model(problem), t0, config);
}

}  // namespace pmaj
