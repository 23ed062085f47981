#include "pmaj/atoms.hpp"

#include <cmath>
#include <stdexcept>

namespace pmaj {

namespace {

constexpr double kEntropyFloor = 1e-12;  // domain clamp before logs
constexpr double kSimplexTol = 1e-8;

double xlogx(double v) { return v * std::log(std::max(v, kEntropyFloor)); }

void check_simplex(const Vec& x) {
  if (x.minCoeff() < -kSimplexTol || std::abs(x.sum() - 1.0) > kSimplexTol) {
    throw std::domain_error("entropy atom: point is not on the unit simplex");
  }
}

}  // namespace

double log_sum_exp(const Vec& p) {
  const double m = p.maxCoeff();
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::exp(p[i] - m);
  return m + std::log(s);
}

Vec softmax(const Vec& p) {
  const double m = p.maxCoeff();
  Vec e = (p.array() - m).exp();
  return e / e.sum();
}

Vec entropy_bregman_prox(const Vec& xbar, const Vec& g, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("entropy_bregman_prox: tau <= 0");
  Vec logx = xbar.array().max(kEntropyFloor).log() - tau * g.array();
  const double m = logx.maxCoeff();
  Vec e = (logx.array() - m).exp();
  return e / e.sum();
}

EnergyAtom EnergyAtom::quadratic(Vec y) {
  EnergyAtom a(AtomKind::Quadratic, static_cast<int>(y.size()));
  a.data_ = std::move(y);
  return a;
}

EnergyAtom EnergyAtom::weighted_l1(double weight, int dim) {
  if (weight < 0.0) throw std::invalid_argument("weighted_l1: negative weight");
  EnergyAtom a(AtomKind::WeightedL1, dim);
  a.weight_ = weight;
  return a;
}

EnergyAtom EnergyAtom::weighted_l1(double weight, Mat map) {
  EnergyAtom a = weighted_l1(weight, static_cast<int>(map.cols()));
  a.map_ = std::move(map);
  return a;
}

EnergyAtom EnergyAtom::linear(Vec c) {
  EnergyAtom a(AtomKind::Linear, static_cast<int>(c.size()));
  a.data_ = std::move(c);
  return a;
}

EnergyAtom EnergyAtom::entropy_simplex(int dim) {
  return EnergyAtom(AtomKind::EntropySimplex, dim);
}

EnergyAtom EnergyAtom::zero(int dim) { return EnergyAtom(AtomKind::Zero, dim); }

double EnergyAtom::modulus() const {
  switch (kind_) {
    case AtomKind::Quadratic:
      return 1.0;
    case AtomKind::EntropySimplex:
      return 1.0;  // Pinsker: KL(x,z) >= 1/2 ||x-z||_1^2 >= 1/2 ||x-z||_2^2
    default:
      return 0.0;
  }
}

double EnergyAtom::eval(const Vec& x) const {
  switch (kind_) {
    case AtomKind::Quadratic:
      return 0.5 * (x - data_).squaredNorm();
    case AtomKind::WeightedL1:
      return weight_ * (map_ ? (*map_ * x).lpNorm<1>() : x.lpNorm<1>());
    case AtomKind::Linear:
      return data_.dot(x);
    case AtomKind::EntropySimplex: {
      check_simplex(x);
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) s += xlogx(std::max(x[i], 0.0));
      return s;
    }
    case AtomKind::Zero:
      return 0.0;
  }
  return 0.0;
}

Vec EnergyAtom::subgradient(const Vec& x) const {
  switch (kind_) {
    case AtomKind::Quadratic:
      return x - data_;
    case AtomKind::WeightedL1: {
      // canonical selection: 0 on the kink interval
      auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
      if (map_) {
        Vec ax = *map_ * x;
        return weight_ * (map_->transpose() * ax.unaryExpr(sgn));
      }
      return weight_ * x.unaryExpr(sgn);
    }
    case AtomKind::Linear:
      return data_;
    case AtomKind::EntropySimplex: {
      check_simplex(x);
      return x.array().max(kEntropyFloor).log() + 1.0;
    }
    case AtomKind::Zero:
      return Vec::Zero(dim_);
  }
  return Vec::Zero(dim_);
}

double EnergyAtom::conjugate(const Vec& p) const {
  switch (kind_) {
    case AtomKind::Quadratic:
      return 0.5 * p.squaredNorm() + p.dot(data_);
    case AtomKind::WeightedL1: {
      if (!map_) {
        return p.cwiseAbs().maxCoeff() <= weight_ * (1.0 + 1e-12) + 1e-12
                   ? 0.0
                   : kInf;
      }
      // p must be A^T q with ||q||_inf <= w; min-norm certificate via least
      // squares
      Vec q = map_->transpose()
                  .colPivHouseholderQr()
                  .solve(p);
      const double res = (map_->transpose() * q - p).norm();
      if (res > 1e-8 * scale_of(p)) return kInf;
      return q.cwiseAbs().maxCoeff() <= weight_ + 1e-8 ? 0.0 : kInf;
    }
    case AtomKind::Linear:
      return (p - data_).cwiseAbs().maxCoeff() <= 1e-10 * scale_of(data_)
                 ? 0.0
                 : kInf;
    case AtomKind::EntropySimplex:
      return log_sum_exp(p);
    case AtomKind::Zero:
      return p.cwiseAbs().maxCoeff() <= 1e-12 ? 0.0 : kInf;
  }
  return kInf;
}

bool EnergyAtom::conjugate_smooth() const {
  return kind_ == AtomKind::Quadratic || kind_ == AtomKind::EntropySimplex;
}

Vec EnergyAtom::conjugate_grad(const Vec& p) const {
  switch (kind_) {
    case AtomKind::Quadratic:
      return p + data_;
    case AtomKind::EntropySimplex:
      return softmax(p);
    default:
      throw std::logic_error("conjugate_grad: conjugate is not smooth");
  }
}

Vec EnergyAtom::conjugate_domain_project(const Vec& p) const {
  switch (kind_) {
    case AtomKind::WeightedL1:
      if (map_) throw std::logic_error("conjugate projection needs identity map");
      return p.cwiseMax(-weight_).cwiseMin(weight_);
    case AtomKind::Linear:
      return data_;
    case AtomKind::Zero:
      return Vec::Zero(dim_);
    default:
      return p;
  }
}

Vec EnergyAtom::prox(const Vec& xbar, double tau) const {
  if (tau <= 0.0) throw std::invalid_argument("prox: tau <= 0");
  switch (kind_) {
    case AtomKind::Quadratic:
      return (xbar + tau * data_) / (1.0 + tau);
    case AtomKind::WeightedL1: {
      if (map_) throw std::logic_error("prox of ||Ax||_1 with general A unsupported");
      const double t = tau * weight_;
      Vec r(xbar.size());
      for (int i = 0; i < xbar.size(); ++i) {
        const double m = std::max(std::abs(xbar[i]) - t, 0.0);
        r[i] = xbar[i] >= 0.0 ? m : -m;
      }
      return r;
    }
    case AtomKind::Linear:
      return xbar - tau * data_;
    case AtomKind::EntropySimplex: {
      // KKT: x + tau log x = xbar - tau - mu, componentwise monotone; bisect
      // the multiplier mu so the components sum to one.
      auto solve_comp = [&](double b) {
        double x = std::max(std::exp(b / tau), kEntropyFloor);
        if (x > 1.0) x = 1.0;
        for (int it = 0; it < 100; ++it) {
          const double f = x + tau * std::log(x) - b;
          const double df = 1.0 + tau / x;
          double step = f / df;
          double nx = x - step;
          if (nx <= 0.0) nx = x / 2.0;
          if (std::abs(nx - x) < 1e-15 * std::max(1.0, x)) { x = nx; break; }
          x = nx;
        }
        return x;
      };
      auto total = [&](double mu) {
        double s = 0.0;
        for (int i = 0; i < xbar.size(); ++i)
          s += solve_comp(xbar[i] - tau - mu);
        return s;
      };
      // total(mu) is decreasing; bracket so total(lo) >= 1 >= total(hi)
      double lo = xbar.maxCoeff();
      double hi = lo;
      while (total(lo) < 1.0) lo -= std::max(1.0, tau);
      while (total(hi) > 1.0) hi += std::max(1.0, tau);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) >= 1.0 ? lo : hi) = mid;
      }
      const double mu = 0.5 * (lo + hi);
      Vec r(xbar.size());
      for (int i = 0; i < xbar.size(); ++i) r[i] = solve_comp(xbar[i] - tau - mu);
      return r / r.sum();
    }
    case AtomKind::Zero:
      return xbar;
  }
  return xbar;
}

double EnergyAtom::bregman(const Vec& x, const Vec& z, const Vec& p) const {
  const double gap = w_gap(p, z);
  if (!(gap <= kResidualTol * scale_of(z))) {
    throw std::invalid_argument("bregman: p is not a subgradient at z");
  }
  return eval(x) - eval(z) - p.dot(x - z);
}

double EnergyAtom::w_gap(const Vec& p, const Vec& x) const {
  const double c = conjugate(p);
  if (std::isinf(c)) return kInf;
  return c + eval(x) - p.dot(x);
}

double eval_energy(const SplitEnergy& e, const Vec& x) { return e.eval(x); }

double BregmanGenerator::value(const Vec& x, const Vec& z) const {
  switch (kind_) {
    case Kind::Quadratic:
      return 0.5 * (x - z).squaredNorm();
    case Kind::EntropySimplex: {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        const double xi = std::max(x[i], kEntropyFloor);
        const double zi = std::max(z[i], kEntropyFloor);
        s += x[i] * (std::log(xi) - std::log(zi));
      }
      return std::max(s, 0.0);
    }
  }
  return 0.0;
}

Vec BregmanGenerator::grad_second(const Vec& x, const Vec& z) const {
  switch (kind_) {
    case Kind::Quadratic:
      return z - x;
    case Kind::EntropySimplex:
      return 1.0 - (x.array() / z.array().max(kEntropyFloor));
  }
  return Vec::Zero(x.size());
}

}  // namespace pmaj
