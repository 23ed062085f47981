#include "pmaj/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pmaj {

double Rng::gaussian(double sigma) {
  if (have_spare_) {
    have_spare_ = false;
    return sigma * spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return sigma * r * std::cos(a);
}

std::uint64_t Rng::integer(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::integer: zero bound");
  // rejection sampling keeps the draw unbiased and portable
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

namespace {

int next_token(std::istream& in) {
  // skips whitespace and '#' comments, reads one non-negative integer
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("truncated header");
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
  }
  int v;
  if (!(in >> v)) throw std::runtime_error("malformed header");
  return v;
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char p, kind;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6')) {
    throw std::runtime_error(path + ": unsupported format (need P2/P3/P5/P6)");
  }
  const bool color = kind == '3' || kind == '6';
  const bool ascii = kind == '2' || kind == '3';
  const int w = next_token(in);
  const int h = next_token(in);
  const int maxv = next_token(in);
  if (maxv != 255) {
    throw std::runtime_error(path + ": unsupported bit depth (maxval " +
                             std::to_string(maxv) + ", need 255)");
  }
  const int nch = color ? 3 : 1;
  Image img;
  for (int c = 0; c < nch; ++c) img.channels.push_back(Mat::Zero(h, w));
  if (ascii) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        for (int c = 0; c < nch; ++c)
          img.channels[c](i, j) = static_cast<double>(next_token(in));
  } else {
    in.get();   // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<size_t>(h) * w * nch);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size()) {
      throw std::runtime_error(path + ": truncated pixel data");
    }
    size_t at = 0;
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        for (int c = 0; c < nch; ++c)
          img.channels[c](i, j) = static_cast<double>(buf[at++]);
  }
  return img;
}

void save_pgm(const std::string& path, const Mat& gray) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P5\n" << gray.cols() << " " << gray.rows() << "\n255\n";
  for (int i = 0; i < gray.rows(); ++i) {
    for (int j = 0; j < gray.cols(); ++j) {
      const double v = std::clamp(std::round(gray(i, j)), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
}

Mat rgb_to_gray(const Image& img) {
  if (img.channels.size() != 3) {
    throw std::invalid_argument("rgb_to_gray: need 3 channels");
  }
  return 0.2989 * img.channels[0] + 0.5870 * img.channels[1] +
         0.1140 * img.channels[2];
}

Mat add_gaussian_noise(const Mat& image, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) throw std::invalid_argument("add_gaussian_noise: sigma <= 0");
  Rng rng(seed);
  Mat out = image;
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      out(i, j) += rng.gaussian(sigma);   // unclipped by design
  return out;
}

SplitCorpus extract_patches(const Mat& clean, int side, int count,
                            double sigma, std::uint64_t seed) {
  if (clean.rows() < side || clean.cols() < side) {
    throw std::invalid_argument("extract_patches: image smaller than patch");
  }
  Rng rng(seed);
  std::set<std::pair<int, int>> used;
  std::vector<Mat> patches;
  int attempts = 0;
  while (static_cast<int>(patches.size()) < count) {
    const int i = static_cast<int>(rng.integer(clean.rows() - side + 1));
    const int j = static_cast<int>(rng.integer(clean.cols() - side + 1));
    if (used.count({i, j}) && attempts++ < 64 * count) continue;
    used.insert({i, j});
    patches.push_back(clean.block(i, j, side, side));
  }
  SplitCorpus out;
  out.train.side = out.test.side = side;
  for (int k = 0; k < count; ++k) {
    PatchCorpus& dst = k < (count + 1) / 2 ? out.train : out.test;
    dst.clean.push_back(patches[k]);
    dst.noisy.push_back(
        add_gaussian_noise(patches[k], sigma, seed + 1000 + k));
  }
  return out;
}

Mat synth_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  // Oriented texture: the oscillation is constant along the (1,-1) diagonal,
  // so a directional 3x3 analysis kernel can annihilate the clean signal
  // while axis-aligned differences cannot. A slow ramp and two flat discs
  // add low-frequency and piecewise-constant content.
  const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
  const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
  Mat img(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double t = static_cast<double>(i + j);
      img(i, j) = 120.0 + 25.0 * j / std::max(1, w - 1) +
                  55.0 * std::sin(2.0 * M_PI * t / 9.0 + phase1) +
                  28.0 * std::sin(2.0 * M_PI * t / 23.0 + phase2);
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double ci = rng.uniform(0.2, 0.8) * h;
    const double cj = rng.uniform(0.2, 0.8) * w;
    const double r = rng.uniform(0.05, 0.09) * std::min(h, w);
    const double lvl = rng.uniform(40.0, 215.0);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        if ((i - ci) * (i - ci) + (j - cj) * (j - cj) < r * r) img(i, j) = lvl;
  }
  return img;
}

FilterBank random_bank(int filters, int side, double scale,
                       std::uint64_t seed) {
  Rng rng(seed);
  const int dim = side * side - 1;
  Mat g(std::max(filters, dim), dim);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) g(i, j) = rng.gaussian();
  // orthonormal rows via Gram-Schmidt, then scaled
  Mat q = Mat::Zero(filters, dim);
  int have = 0;
  for (int i = 0; i < g.rows() && have < filters; ++i) {
    Vec v = g.row(i).transpose();
    for (int k = 0; k < have; ++k) v -= q.row(k).dot(v) * q.row(k).transpose();
    const double nn = v.norm();
    if (nn < 1e-10) continue;
    q.row(have++) = (v / nn).transpose();
  }
  FilterBank bank = FilterBank::zeros(filters, side);
  bank.coeff = scale * q;
  return bank;
}

std::string format_double(double v) {
  char buf[64];
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const Table& table) {
  std::ostringstream out;
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::invalid_argument("write_csv: ragged row");
    }
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  write_text(path, out.str());
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

}  // namespace pmaj
