#include "pmaj/filterbank.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace pmaj {

std::vector<Mat> dct_atoms(int f) {
  if (f < 2) throw std::invalid_argument("dct_atoms: f < 2");
  auto basis1d = [f](int u, int i) {
    const double c = u == 0 ? std::sqrt(1.0 / f) : std::sqrt(2.0 / f);
    return c * std::cos(M_PI * (2 * i + 1) * u / (2.0 * f));
  };
  std::vector<Mat> atoms;
  atoms.reserve(f * f - 1);
  for (int u = 0; u < f; ++u) {
    for (int v = 0; v < f; ++v) {
      if (u == 0 && v == 0) continue;  // constant atom excluded
      Mat a(f, f);
      for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) a(i, j) = basis1d(u, i) * basis1d(v, j);
      atoms.push_back(std::move(a));
    }
  }
  return atoms;
}

FilterBank FilterBank::zeros(int filters, int side) {
  FilterBank b;
  b.filters = filters;
  b.side = side;
  b.coeff = Mat::Zero(filters, side * side - 1);
  return b;
}

std::vector<Mat> FilterBank::kernels() const {
  const std::vector<Mat> atoms = dct_atoms(side);
  std::vector<Mat> ks(filters, Mat::Zero(side, side));
  for (int k = 0; k < filters; ++k) {
    for (size_t j = 0; j < atoms.size(); ++j) {
      ks[k] += coeff(k, static_cast<Eigen::Index>(j)) * atoms[j];
    }
  }
  return ks;
}

Mat conv_apply(const Mat& kernel, const Mat& x) {
  const int f = static_cast<int>(kernel.rows());
  const int o = f / 2;
  const int h = static_cast<int>(x.rows());
  const int w = static_cast<int>(x.cols());
  if (h < f || w < f) throw std::invalid_argument("conv_apply: image smaller than kernel");
  Mat out = Mat::Zero(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double s = 0.0;
      for (int a = 0; a < f; ++a) {
        const int ii = i + a - o;
        if (ii < 0 || ii >= h) continue;
        for (int b = 0; b < f; ++b) {
          const int jj = j + b - o;
          if (jj < 0 || jj >= w) continue;
          s += kernel(a, b) * x(ii, jj);
        }
      }
      out(i, j) = s;
    }
  }
  return out;
}

Mat conv_adjoint(const Mat& kernel, const Mat& p) {
  const int f = static_cast<int>(kernel.rows());
  const int o = f / 2;
  const int h = static_cast<int>(p.rows());
  const int w = static_cast<int>(p.cols());
  Mat out = Mat::Zero(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double s = 0.0;
      for (int a = 0; a < f; ++a) {
        const int ii = i - a + o;
        if (ii < 0 || ii >= h) continue;
        for (int b = 0; b < f; ++b) {
          const int jj = j - b + o;
          if (jj < 0 || jj >= w) continue;
          s += kernel(a, b) * p(ii, jj);
        }
      }
      out(i, j) = s;
    }
  }
  return out;
}

Mat kernel_gradient(const Mat& x, const Mat& s, int side) {
  const int o = side / 2;
  const int h = static_cast<int>(x.rows());
  const int w = static_cast<int>(x.cols());
  Mat g = Mat::Zero(side, side);
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      double acc = 0.0;
      for (int i = 0; i < h; ++i) {
        const int ii = i + a - o;
        if (ii < 0 || ii >= h) continue;
        for (int j = 0; j < w; ++j) {
          const int jj = j + b - o;
          if (jj < 0 || jj >= w) continue;
          acc += s(i, j) * x(ii, jj);
        }
      }
      g(a, b) = acc;
    }
  }
  return g;
}

std::vector<Mat> filterbank_apply(const FilterBank& bank, const Mat& x) {
  std::vector<Mat> maps;
  maps.reserve(bank.filters);
  for (const Mat& k : bank.kernels()) maps.push_back(conv_apply(k, x));
  return maps;
}

Mat filterbank_adjoint(const FilterBank& bank, const std::vector<Mat>& maps) {
  const std::vector<Mat> ks = bank.kernels();
  if (maps.size() != ks.size()) {
    throw std::invalid_argument("filterbank_adjoint: map count mismatch");
  }
  Mat out = Mat::Zero(maps[0].rows(), maps[0].cols());
  for (size_t k = 0; k < ks.size(); ++k) out += conv_adjoint(ks[k], maps[k]);
  return out;
}

LinearMap filterbank_map(const FilterBank& bank, int h, int w) {
  auto kernels = std::make_shared<std::vector<Mat>>(bank.kernels());
  const int n = h * w;
  const int kcount = bank.filters;

  double norm2 = 0.0;
  for (const Mat& k : *kernels) {
    const double l1 = k.cwiseAbs().sum();
    norm2 += l1 * l1;
  }

  LinearMap m;
  m.in_dim = n;
  m.out_dim = n * kcount;
  m.norm_bound = std::max(std::sqrt(norm2), 1e-12);
  m.apply = [kernels, h, w, n, kcount](const Vec& v) {
    Mat x = unflatten(v, h, w);
    Vec out(static_cast<Eigen::Index>(n) * kcount);
    for (int k = 0; k < kcount; ++k) {
      out.segment(static_cast<Eigen::Index>(k) * n, n) =
          flatten(conv_apply((*kernels)[k], x));
    }
    return out;
  };
  m.adjoint = [kernels, h, w, n, kcount](const Vec& p) {
    Mat out = Mat::Zero(h, w);
    for (int k = 0; k < kcount; ++k) {
      out += conv_adjoint((*kernels)[k],
                          unflatten(p.segment(static_cast<Eigen::Index>(k) * n, n), h, w));
    }
    return flatten(out);
  };
  return m;
}

LinearMap grad_map(int h, int w, double scale) {
  const int n = h * w;
  LinearMap m;
  m.in_dim = n;
  m.out_dim = 2 * n;
  m.norm_bound = scale * std::sqrt(8.0);
  m.apply = [h, w, n, scale](const Vec& v) {
    Mat x = unflatten(v, h, w);
    Mat dx = Mat::Zero(h, w), dy = Mat::Zero(h, w);
    for (int i = 0; i + 1 < h; ++i)
      for (int j = 0; j < w; ++j) dx(i, j) = scale * (x(i + 1, j) - x(i, j));
    for (int i = 0; i < h; ++i)
      for (int j = 0; j + 1 < w; ++j) dy(i, j) = scale * (x(i, j + 1) - x(i, j));
    Vec out(2 * n);
    out.head(n) = flatten(dx);
    out.tail(n) = flatten(dy);
    return out;
  };
  m.adjoint = [h, w, n, scale](const Vec& p) {
    Mat dx = unflatten(p.head(n), h, w);
    Mat dy = unflatten(p.tail(n), h, w);
    Mat out = Mat::Zero(h, w);
    for (int i = 0; i + 1 < h; ++i)
      for (int j = 0; j < w; ++j) {
        out(i + 1, j) += scale * dx(i, j);
        out(i, j) -= scale * dx(i, j);
      }
    for (int i = 0; i < h; ++i)
      for (int j = 0; j + 1 < w; ++j) {
        out(i, j + 1) += scale * dy(i, j);
        out(i, j) -= scale * dy(i, j);
      }
    return flatten(out);
  };
  return m;
}

}  // namespace pmaj
