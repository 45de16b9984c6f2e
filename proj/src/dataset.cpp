#include "pidssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pidssl/config.hpp"
#include "pidssl/errors.hpp"
#include "pidssl/rng.hpp"

namespace pidssl {

namespace {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Bilinear upsample of a coarse grid; the low-frequency class template.
double sample_grid(const std::vector<double>& grid, std::size_t gh, std::size_t gw,
                   double fy, double fx) {
  double sy = fy * static_cast<double>(gh) - 0.5;
  double sx = fx * static_cast<double>(gw) - 0.5;
  sy = std::min(std::max(sy, 0.0), static_cast<double>(gh - 1));
  sx = std::min(std::max(sx, 0.0), static_cast<double>(gw - 1));
  std::size_t y0 = static_cast<std::size_t>(sy);
  std::size_t x0 = static_cast<std::size_t>(sx);
  std::size_t y1 = std::min(y0 + 1, gh - 1);
  std::size_t x1 = std::min(x0 + 1, gw - 1);
  double wy = sy - static_cast<double>(y0);
  double wx = sx - static_cast<double>(x0);
  double top = grid[y0 * gw + x0] * (1 - wx) + grid[y0 * gw + x1] * wx;
  double bot = grid[y1 * gw + x0] * (1 - wx) + grid[y1 * gw + x1] * wx;
  return top * (1 - wy) + bot * wy;
}

}  // namespace

std::vector<ImageSample> synth_dataset(std::size_t num_classes,
                                       std::size_t per_class, std::size_t h,
                                       std::size_t w, std::size_t c,
                                       std::uint64_t seed, double noise_std) {
  if (num_classes == 0 || per_class == 0 || h == 0 || w == 0 || c == 0)
    throw std::invalid_argument("synth_dataset: all sizes must be positive");
  if (noise_std < 0.0) throw std::invalid_argument("synth_dataset: negative noise");

  const std::size_t gh = 4, gw = 4;
  std::vector<ImageSample> out;
  out.reserve(num_classes * per_class);
  for (std::size_t k = 0; k < num_classes; ++k) {
    Rng template_rng = Rng::stream({seed, kStreamSynth, k});
    std::vector<double> grid(gh * gw * c);
    for (double& v : grid) v = template_rng.uniform();

    std::vector<double> tmpl(h * w * c);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t ch = 0; ch < c; ++ch) {
          double fy = (static_cast<double>(y) + 0.5) / static_cast<double>(h);
          double fx = (static_cast<double>(x) + 0.5) / static_cast<double>(w);
          std::vector<double> channel_grid(grid.begin() + ch * gh * gw,
                                           grid.begin() + (ch + 1) * gh * gw);
          tmpl[(y * w + x) * c + ch] = sample_grid(channel_grid, gh, gw, fy, fx);
        }

    for (std::size_t i = 0; i < per_class; ++i) {
      Rng noise_rng = Rng::stream({seed, kStreamSynth, k, 1000 + i});
      ImageSample s;
      s.h = h;
      s.w = w;
      s.c = c;
      s.label = static_cast<int>(k);
      s.pixels.resize(h * w * c);
      for (std::size_t p = 0; p < s.pixels.size(); ++p) {
        double v = tmpl[p];
        if (noise_std > 0.0) v += noise_std * noise_rng.normal();
        s.pixels[p] = clamp01(v);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<ImageSample> load_csv(const std::string& path, std::size_t h,
                                  std::size_t w, std::size_t c) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  std::size_t expected = h * w * c;
  std::vector<ImageSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ImageSample s;
    s.h = h;
    s.w = w;
    s.c = c;
    if (!std::getline(ls, tok, ','))
      throw ConfigError(path + " line " + std::to_string(line_no) + ": empty row");
    try {
      s.label = std::stoi(tok);
    } catch (...) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": bad label '" + tok + "'");
    }
    if (s.label < 0)
      throw ConfigError(path + " line " + std::to_string(line_no) + ": negative label");
    while (std::getline(ls, tok, ',')) {
      try {
        s.pixels.push_back(std::stod(tok));
      } catch (...) {
        throw ConfigError(path + " line " + std::to_string(line_no) +
                          ": bad pixel '" + tok + "'");
      }
    }
    if (s.pixels.size() != expected)
      throw ConfigError(path + " line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expected) + " pixels, got " +
                        std::to_string(s.pixels.size()));
    for (double& v : s.pixels) v = clamp01(v);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ConfigError(path + ": no samples");
  return out;
}

void save_csv(const std::string& path, const std::vector<ImageSample>& samples) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file: " + path);
  out.precision(17);
  for (const ImageSample& s : samples) {
    out << s.label;
    for (double v : s.pixels) out << "," << v;
    out << "\n";
  }
}

namespace {
std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ConfigError(path + ": truncated header at byte " +
                             std::to_string(static_cast<long long>(in.tellg())));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}
void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<char*>(b), 4);
}
}  // namespace

std::vector<ImageSample> load_idx(const std::string& images_path,
                                  const std::string& labels_path,
                                  std::size_t channels) {
  std::ifstream im(images_path, std::ios::binary);
  if (!im) throw ConfigError("cannot open dataset file: " + images_path);
  if (read_be32(im, images_path) != 0x00000803u)
    throw ConfigError(images_path + ": bad magic, expected 0x00000803");
  std::uint32_t n = read_be32(im, images_path);
  std::uint32_t rows = read_be32(im, images_path);
  std::uint32_t cols = read_be32(im, images_path);
  if (channels == 0 || cols % channels != 0)
    throw ConfigError(images_path + ": column count not divisible by channels");

  std::ifstream lb(labels_path, std::ios::binary);
  if (!lb) throw ConfigError("cannot open dataset file: " + labels_path);
  if (read_be32(lb, labels_path) != 0x00000801u)
    throw ConfigError(labels_path + ": bad magic, expected 0x00000801");
  if (read_be32(lb, labels_path) != n)
    throw ConfigError(labels_path + ": label count differs from image count");

  std::vector<ImageSample> out;
  out.reserve(n);
  std::size_t npix = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(npix);
  for (std::uint32_t i = 0; i < n; ++i) {
    im.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(npix));
    if (!im) throw ConfigError(images_path + ": truncated at sample " + std::to_string(i));
    int label = lb.get();
    if (label == EOF)
      throw ConfigError(labels_path + ": truncated at sample " + std::to_string(i));
    ImageSample s;
    s.h = rows;
    s.w = cols / channels;
    s.c = channels;
    s.label = label;
    s.pixels.resize(npix);
    for (std::size_t p = 0; p < npix; ++p) s.pixels[p] = buf[p] / 255.0;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ConfigError(images_path + ": no samples");
  return out;
}

void save_idx(const std::string& images_path, const std::string& labels_path,
              const std::vector<ImageSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("save_idx: no samples");
  std::ofstream im(images_path, std::ios::binary);
  std::ofstream lb(labels_path, std::ios::binary);
  if (!im || !lb) throw ConfigError("cannot write idx files");
  write_be32(im, 0x00000803u);
  write_be32(im, static_cast<std::uint32_t>(samples.size()));
  write_be32(im, static_cast<std::uint32_t>(samples[0].h));
  write_be32(im, static_cast<std::uint32_t>(samples[0].w * samples[0].c));
  write_be32(lb, 0x00000801u);
  write_be32(lb, static_cast<std::uint32_t>(samples.size()));
  for (const ImageSample& s : samples) {
    for (double v : s.pixels) {
      double q = std::round(clamp01(v) * 255.0);
      im.put(static_cast<char>(static_cast<unsigned char>(q)));
    }
    lb.put(static_cast<char>(static_cast<unsigned char>(s.label)));
  }
}

std::vector<ImageSample> load_dataset(const DatasetSource& src) {
  if (src.kind == "synthetic") {
    if (src.snr <= 0.0) throw ConfigError("dataset.snr must be positive");
    return synth_dataset(src.classes, src.per_class, src.h, src.w, src.c,
                         src.seed, 0.25 / src.snr);
  }
  if (src.kind == "csv") return load_csv(src.path, src.h, src.w, src.c);
  if (src.kind == "idx") return load_idx(src.path, src.labels_path, src.c);
  if (src.kind == "synthetic-manifest") {
    Config m = Config::from_file(src.path);
    m.require_known_keys({"seed", "classes", "per_class", "height", "width",
                          "channels", "snr"});
    DatasetSource resolved;
    resolved.kind = "synthetic";
    resolved.seed = m.get_uint("seed", 1234);
    resolved.classes = static_cast<std::size_t>(m.get_uint("classes", 4));
    resolved.per_class = static_cast<std::size_t>(m.get_uint("per_class", 500));
    resolved.h = static_cast<std::size_t>(m.get_uint("height", 16));
    resolved.w = static_cast<std::size_t>(m.get_uint("width", 16));
    resolved.c = static_cast<std::size_t>(m.get_uint("channels", 1));
    resolved.snr = m.get_double("snr", 5.0);
    return load_dataset(resolved);
  }
  throw ConfigError("unknown dataset kind: " + src.kind);
}

DatasetSplit split_dataset(const std::vector<ImageSample>& all,
                           double train_fraction) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < all.size(); ++i) by_class[all[i].label].push_back(i);
  DatasetSplit out;
  for (const auto& [label, idxs] : by_class) {
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(idxs.size())));
    n_train = std::max<std::size_t>(1, std::min(n_train, idxs.size() - 1));
    for (std::size_t i = 0; i < idxs.size(); ++i)
      (i < n_train ? out.train : out.test).push_back(all[idxs[i]]);
  }
  return out;
}

Matrix flatten_samples(const std::vector<ImageSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("flatten_samples: empty");
  std::size_t dim = samples[0].pixels.size();
  Matrix m(samples.size(), dim);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    if (samples[r].pixels.size() != dim)
      throw std::invalid_argument("flatten_samples: ragged sample sizes");
    std::memcpy(m.row_ptr(r), samples[r].pixels.data(), dim * sizeof(double));
  }
  return m;
}

std::vector<int> sample_labels(const std::vector<ImageSample>& samples) {
  std::vector<int> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].label;
  return out;
}

std::size_t count_classes(const std::vector<ImageSample>& samples) {
  int m = -1;
  for (const ImageSample& s : samples) m = std::max(m, s.label);
  return static_cast<std::size_t>(m + 1);
}

}  // namespace pidssl
