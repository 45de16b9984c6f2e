#ifndef PIDSSL_AUGMENT_HPP
#define PIDSSL_AUGMENT_HPP

#include <string>
#include <utility>

#include "pidssl/dataset.hpp"
#include "pidssl/rng.hpp"

namespace pidssl {

// Stochastic view pipeline: random resized crop -> horizontal flip ->
// color jitter -> grayscale -> additive pixel noise, clamped to [0, 1].
struct AugmentPolicy {
  std::string name = "standard";
  double crop_scale_min = 0.2, crop_scale_max = 1.0;
  double aspect_min = 0.75, aspect_max = 4.0 / 3.0;  // relative to the image
  double flip_prob = 0.5;
  double grayscale_prob = 0.1;
  double jitter_brightness = 0.4, jitter_contrast = 0.4, jitter_saturation = 0.4;
  double jitter_prob = 0.8;
  double noise_std = 0.0;

  static AugmentPolicy standard();
  static AugmentPolicy heavy();
  // No-op pipeline: full-frame crop, all probabilities zero.
  static AugmentPolicy identity();
  static AugmentPolicy by_name(const std::string& name);

  void validate() const;
};

ImageSample flip_horizontal(const ImageSample& s);

// One stochastic view. Draw order is fixed: crop parameters, flip roll,
// jitter roll + three factors, grayscale roll, then per-pixel noise.
ImageSample augment_once(const ImageSample& s, const AugmentPolicy& policy,
                         Rng& rng);

// Two independent views of the same sample from one RNG stream; the label is
// preserved.
std::pair<ImageSample, ImageSample> make_views(const ImageSample& s,
                                               const AugmentPolicy& policy,
                                               Rng& rng);

}  // namespace pidssl

#endif
