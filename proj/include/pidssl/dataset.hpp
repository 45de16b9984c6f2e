#ifndef PIDSSL_DATASET_HPP
#define PIDSSL_DATASET_HPP

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "pidssl/matrix.hpp"

namespace pidssl {

// One image: h x w x c pixels in [0, 1] plus a class label.
struct ImageSample {
  std::size_t h = 0, w = 0, c = 0;
  std::vector<double> pixels;  // row-major, channel fastest
  int label = 0;

  double at(std::size_t y, std::size_t x, std::size_t ch) const {
    return pixels[(y * w + x) * c + ch];
  }
  double& at(std::size_t y, std::size_t x, std::size_t ch) {
    return pixels[(y * w + x) * c + ch];
  }
};

// Smooth per-class random templates plus per-sample Gaussian pixel noise.
// Deterministic in the seed; class-major sample order. noise_std = 0 makes
// all samples of a class identical.
std::vector<ImageSample> synth_dataset(std::size_t num_classes,
                                       std::size_t per_class, std::size_t h,
                                       std::size_t w, std::size_t c,
                                       std::uint64_t seed, double noise_std);

// csv: `label,p0,p1,...`, one sample per line; pixel count must equal h*w*c.
std::vector<ImageSample> load_csv(const std::string& path, std::size_t h,
                                  std::size_t w, std::size_t c);
void save_csv(const std::string& path, const std::vector<ImageSample>& samples);

// idx-like pair: images file with magic 0x00000803 (u8 pixels, dims n,h,w --
// channels folded into w for c > 1) and labels file with magic 0x00000801.
std::vector<ImageSample> load_idx(const std::string& images_path,
                                  const std::string& labels_path,
                                  std::size_t channels = 1);
void save_idx(const std::string& images_path, const std::string& labels_path,
              const std::vector<ImageSample>& samples);

// Structured description of any dataset source; resolves config blocks.
struct DatasetSource {
  std::string kind;  // "synthetic" | "csv" | "idx" | "synthetic-manifest"
  std::string path;         // csv/idx images/manifest path
  std::string labels_path;  // idx labels
  std::size_t h = 16, w = 16, c = 1;
  std::size_t classes = 4, per_class = 500;
  double snr = 5.0;
  std::uint64_t seed = 1234;
};

std::vector<ImageSample> load_dataset(const DatasetSource& src);

// Balanced deterministic split: the first train_fraction of every class goes
// to train, the rest to test.
struct DatasetSplit {
  std::vector<ImageSample> train;
  std::vector<ImageSample> test;
};
DatasetSplit split_dataset(const std::vector<ImageSample>& all,
                           double train_fraction);

// Flatten samples to an n x (h*w*c) matrix, row per sample.
Matrix flatten_samples(const std::vector<ImageSample>& samples);
std::vector<int> sample_labels(const std::vector<ImageSample>& samples);

std::size_t count_classes(const std::vector<ImageSample>& samples);

}  // namespace pidssl

#endif
