#include "pidssl/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace pidssl {

AugmentPolicy AugmentPolicy::standard() { return AugmentPolicy{}; }

AugmentPolicy AugmentPolicy::heavy() {
  AugmentPolicy p;
  p.name = "heavy";
  p.crop_scale_min = 0.05;
  p.crop_scale_max = 0.4;
  p.grayscale_prob = 0.3;
  p.jitter_brightness = 0.8;
  p.jitter_contrast = 0.8;
  p.jitter_saturation = 0.8;
  p.jitter_prob = 1.0;
  p.noise_std = 0.1;
  return p;
}

AugmentPolicy AugmentPolicy::identity() {
  AugmentPolicy p;
  p.name = "identity";
  p.crop_scale_min = 1.0;
  p.crop_scale_max = 1.0;
  p.aspect_min = 1.0;
  p.aspect_max = 1.0;
  p.flip_prob = 0.0;
  p.grayscale_prob = 0.0;
  p.jitter_prob = 0.0;
  p.noise_std = 0.0;
  return p;
}

AugmentPolicy AugmentPolicy::by_name(const std::string& name) {
  if (name == "standard") return standard();
  if (name == "heavy") return heavy();
  if (name == "identity") return identity();
  throw std::invalid_argument("unknown augmentation policy: " + name);
}

void AugmentPolicy::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(flip_prob) || !prob_ok(grayscale_prob) || !prob_ok(jitter_prob))
    throw std::invalid_argument("augment policy: probabilities must be in [0, 1]");
  if (!(crop_scale_min > 0.0) || crop_scale_min > crop_scale_max ||
      crop_scale_max > 1.0 + 1e-12)
    throw std::invalid_argument("augment policy: bad crop scale range");
  if (!(aspect_min > 0.0) || aspect_min > aspect_max)
    throw std::invalid_argument("augment policy: bad aspect range");
  if (noise_std < 0.0) throw std::invalid_argument("augment policy: negative noise");
}

ImageSample flip_horizontal(const ImageSample& s) {
  ImageSample out = s;
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x)
      for (std::size_t ch = 0; ch < s.c; ++ch)
        out.at(y, x, ch) = s.at(y, s.w - 1 - x, ch);
  return out;
}

namespace {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Bilinear read with clamped coordinates, one channel.
double bilinear(const ImageSample& s, double y, double x, std::size_t ch) {
  y = std::min(std::max(y, 0.0), static_cast<double>(s.h - 1));
  x = std::min(std::max(x, 0.0), static_cast<double>(s.w - 1));
  std::size_t y0 = static_cast<std::size_t>(y);
  std::size_t x0 = static_cast<std::size_t>(x);
  std::size_t y1 = std::min(y0 + 1, s.h - 1);
  std::size_t x1 = std::min(x0 + 1, s.w - 1);
  double wy = y - static_cast<double>(y0);
  double wx = x - static_cast<double>(x0);
  double top = s.at(y0, x0, ch) * (1 - wx) + s.at(y0, x1, ch) * wx;
  double bot = s.at(y1, x0, ch) * (1 - wx) + s.at(y1, x1, ch) * wx;
  return top * (1 - wy) + bot * wy;
}

// Random crop of area fraction in [scale_min, scale_max] and aspect ratio
// (relative to the image's own) log-uniform in [aspect_min, aspect_max],
// resized back to the original size.
ImageSample random_resized_crop(const ImageSample& s, const AugmentPolicy& p,
                                Rng& rng) {
  double area = static_cast<double>(s.h * s.w);
  std::size_t ch_ = 0, cw_ = 0;
  for (int attempt = 0; attempt < 10; ++attempt) {
    double frac = rng.uniform(p.crop_scale_min, p.crop_scale_max);
    double ratio = std::exp(rng.uniform(std::log(p.aspect_min), std::log(p.aspect_max)));
    double target = frac * area;
    double cw = std::sqrt(target * ratio * static_cast<double>(s.w) /
                          static_cast<double>(s.h));
    double ch = target / cw;
    std::size_t cwr = static_cast<std::size_t>(std::lround(cw));
    std::size_t chr = static_cast<std::size_t>(std::lround(ch));
    if (cwr >= 1 && chr >= 1 && cwr <= s.w && chr <= s.h) {
      cw_ = cwr;
      ch_ = chr;
      break;
    }
  }
  if (cw_ == 0) {  // fallback: clamped center crop at mean scale
    double frac = 0.5 * (p.crop_scale_min + p.crop_scale_max);
    cw_ = std::max<std::size_t>(1, std::min(s.w, static_cast<std::size_t>(
                                                     std::lround(s.w * std::sqrt(frac)))));
    ch_ = std::max<std::size_t>(1, std::min(s.h, static_cast<std::size_t>(
                                                     std::lround(s.h * std::sqrt(frac)))));
  }
  std::size_t top = static_cast<std::size_t>(rng.below(s.h - ch_ + 1));
  std::size_t left = static_cast<std::size_t>(rng.below(s.w - cw_ + 1));

  ImageSample out = s;
  double sy = static_cast<double>(ch_) / static_cast<double>(s.h);
  double sx = static_cast<double>(cw_) / static_cast<double>(s.w);
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) {
      double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5 + static_cast<double>(top);
      double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5 + static_cast<double>(left);
      for (std::size_t chn = 0; chn < s.c; ++chn)
        out.at(y, x, chn) = bilinear(s, src_y, src_x, chn);
    }
  return out;
}

double luma(const ImageSample& s, std::size_t y, std::size_t x) {
  if (s.c >= 3)
    return 0.299 * s.at(y, x, 0) + 0.587 * s.at(y, x, 1) + 0.114 * s.at(y, x, 2);
  return s.at(y, x, 0);
}

void color_jitter(ImageSample& s, const AugmentPolicy& p, Rng& rng) {
  // Factors are always drawn so the stream layout does not depend on content.
  double brightness = rng.uniform(-p.jitter_brightness, p.jitter_brightness);
  double contrast = rng.uniform(1.0 - p.jitter_contrast, 1.0 + p.jitter_contrast);
  double saturation = rng.uniform(1.0 - p.jitter_saturation, 1.0 + p.jitter_saturation);

  for (double& v : s.pixels) v += brightness;

  double mean = 0.0;
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) mean += luma(s, y, x);
  mean /= static_cast<double>(s.h * s.w);
  for (double& v : s.pixels) v = mean + contrast * (v - mean);

  if (s.c >= 3) {
    for (std::size_t y = 0; y < s.h; ++y)
      for (std::size_t x = 0; x < s.w; ++x) {
        double l = luma(s, y, x);
        for (std::size_t ch = 0; ch < s.c; ++ch)
          s.at(y, x, ch) = l + saturation * (s.at(y, x, ch) - l);
      }
  }
}

void grayscale(ImageSample& s) {
  if (s.c < 3) return;
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) {
      double l = luma(s, y, x);
      for (std::size_t ch = 0; ch < s.c; ++ch) s.at(y, x, ch) = l;
    }
}

}  // namespace

ImageSample augment_once(const ImageSample& s, const AugmentPolicy& policy,
                         Rng& rng) {
  policy.validate();
  if (s.h < 1 || s.w < 1) throw std::invalid_argument("augment: empty image");

  ImageSample out = random_resized_crop(s, policy, rng);
  if (rng.uniform() < policy.flip_prob) out = flip_horizontal(out);
  bool do_jitter = rng.uniform() < policy.jitter_prob;
  if (do_jitter) color_jitter(out, policy, rng);
  if (rng.uniform() < policy.grayscale_prob) grayscale(out);
  if (policy.noise_std > 0.0)
    for (double& v : out.pixels) v += policy.noise_std * rng.normal();
  for (double& v : out.pixels) v = clamp01(v);
  return out;
}

std::pair<ImageSample, ImageSample> make_views(const ImageSample& s,
                                               const AugmentPolicy& policy,
                                               Rng& rng) {
  ImageSample v1 = augment_once(s, policy, rng);
  ImageSample v2 = augment_once(s, policy, rng);
  return {std::move(v1), std::move(v2)};
}

}  // namespace pidssl
