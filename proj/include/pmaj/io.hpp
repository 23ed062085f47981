#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pmaj/denoise.hpp"
#include "pmaj/types.hpp"

namespace pmaj {

// Seeded portable generator: mt19937_64 with an explicit Box-Muller transform
// so noise corpora reproduce bit-for-bit across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {   // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian(double sigma = 1.0);
  std::uint64_t integer(std::uint64_t bound);   // [0, bound)

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct Image {
  std::vector<Mat> channels;   // 1 (gray) or 3 (rgb), floats in [0,255]
  bool gray() const { return channels.size() == 1; }
};

// 8-bit PGM (P2/P5) and PPM (P3/P6) readers/writers.
Image load_image(const std::string& path);
void save_pgm(const std::string& path, const Mat& gray);   // rounds + clamps

Mat rgb_to_gray(const Image& img);

Mat add_gaussian_noise(const Mat& image, double sigma, std::uint64_t seed);

// Random patch corpus with disjoint train/test halves.
struct SplitCorpus {
  PatchCorpus train;
  PatchCorpus test;
};
SplitCorpus extract_patches(const Mat& clean, int side, int count,
                            double sigma, std::uint64_t seed);

// Deterministic piecewise-smooth test image (gradients, discs, stripes);
// values in [0, 255].
Mat synth_image(int h, int w, std::uint64_t seed);

// Random bank: K orthogonalized coefficient rows scaled by `scale`.
FilterBank random_bank(int filters, int side, double scale,
                       std::uint64_t seed);

// CSV with a header row, comma separator and 17-significant-digit floats.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
std::string format_double(double v);
void write_csv(const std::string& path, const Table& table);

void write_text(const std::string& path, const std::string& content);

}  // namespace pmaj
