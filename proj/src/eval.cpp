#include "pidssl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace pidssl {

double top1_accuracy(const std::vector<int>& predictions,
                     const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw std::invalid_argument("top1_accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

Matrix encode_clean(const MlpSpec& spec, const ModelParams& params,
                    const std::vector<ImageSample>& samples) {
  Matrix x = flatten_samples(samples);
  return forward(spec, params, x).encoder_out;
}

namespace {

Matrix encode_augmented(const MlpSpec& spec, const ModelParams& params,
                        const std::vector<ImageSample>& samples,
                        const AugmentPolicy& policy, std::uint64_t seed,
                        std::uint64_t stream_tag) {
  std::vector<ImageSample> views;
  views.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng = Rng::stream({seed, stream_tag, i});
    views.push_back(augment_once(samples[i], policy, rng));
  }
  Matrix x = flatten_samples(views);
  return forward(spec, params, x).encoder_out;
}

}  // namespace

double linear_probe(const MlpSpec& spec, const ModelParams& params,
                    const std::vector<ImageSample>& train_data,
                    const std::vector<ImageSample>& test_data,
                    const ProbeConfig& cfg, const AugmentPolicy* policy) {
  if (train_data.empty() || test_data.empty())
    throw std::invalid_argument("linear_probe: empty dataset");

  std::vector<int> train_labels = sample_labels(train_data);
  std::vector<int> test_labels = sample_labels(test_data);
  std::size_t num_classes =
      std::max(count_classes(train_data), count_classes(test_data));
  std::set<int> seen(train_labels.begin(), train_labels.end());
  for (std::size_t k = 0; k < num_classes; ++k)
    if (!seen.count(static_cast<int>(k)))
      throw std::runtime_error("linear_probe: class " + std::to_string(k) +
                               " absent from training set");

  Matrix ftrain = policy == nullptr
                      ? encode_clean(spec, params, train_data)
                      : encode_augmented(spec, params, train_data, *policy,
                                         cfg.seed, kStreamProbe);
  Matrix ftest = policy == nullptr
                     ? encode_clean(spec, params, test_data)
                     : encode_augmented(spec, params, test_data, *policy,
                                        cfg.seed + 1, kStreamProbe);

  std::size_t n = ftrain.rows(), dim = ftrain.cols();
  Matrix w(dim, num_classes);
  std::vector<double> b(num_classes, 0.0);

  // Adam state for the affine layer.
  Matrix mw(dim, num_classes), vw(dim, num_classes);
  std::vector<double> mb(num_classes, 0.0), vb(num_classes, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, aeps = 1e-8;
  std::uint64_t step = 0;

  std::vector<double> logits(num_classes);
  Matrix gw(dim, num_classes);
  std::vector<double> gb(num_classes);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::stream({cfg.seed, kStreamProbe, 0xE0, epoch});
    std::vector<std::uint32_t> perm =
        shuffle_rng.permutation(static_cast<std::uint32_t>(n));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t stop = std::min(n, start + cfg.batch_size);
      std::size_t bs = stop - start;
      for (auto& row : gw.raw()) row = 0.0;
      std::fill(gb.begin(), gb.end(), 0.0);

      for (std::size_t pos = start; pos < stop; ++pos) {
        std::size_t i = perm[pos];
        const double* f = ftrain.row_ptr(i);
        double maxv = -1e300;
        for (std::size_t k = 0; k < num_classes; ++k) {
          double z = b[k];
          for (std::size_t j = 0; j < dim; ++j) z += f[j] * w(j, k);
          logits[k] = z;
          maxv = std::max(maxv, z);
        }
        double zsum = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) {
          logits[k] = std::exp(logits[k] - maxv);
          zsum += logits[k];
        }
        for (std::size_t k = 0; k < num_classes; ++k) {
          double p = logits[k] / zsum;
          double g = p - (static_cast<int>(k) == train_labels[i] ? 1.0 : 0.0);
          gb[k] += g;
          for (std::size_t j = 0; j < dim; ++j) gw(j, k) += g * f[j];
        }
      }

      double inv_bs = 1.0 / static_cast<double>(bs);
      ++step;
      double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto adam = [&](double& p, double g, double& m, double& v) {
        g *= inv_bs;
        m = beta1 * m + (1 - beta1) * g;
        v = beta2 * v + (1 - beta2) * g * g;
        p -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + aeps);
      };
      for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t k = 0; k < num_classes; ++k)
          adam(w(j, k), gw(j, k), mw(j, k), vw(j, k));
      for (std::size_t k = 0; k < num_classes; ++k) adam(b[k], gb[k], mb[k], vb[k]);
    }
  }

  std::vector<int> pred(ftest.rows());
  for (std::size_t i = 0; i < ftest.rows(); ++i) {
    const double* f = ftest.row_ptr(i);
    double best = -1e300;
    int arg = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      double z = b[k];
      for (std::size_t j = 0; j < dim; ++j) z += f[j] * w(j, k);
      if (z > best) {
        best = z;
        arg = static_cast<int>(k);
      }
    }
    pred[i] = arg;
  }
  return top1_accuracy(pred, test_labels);
}

PidDiagnosticReport pid_diagnostic(const MlpSpec& spec, const ModelParams& params,
                                   const std::vector<ImageSample>& data,
                                   const AugmentPolicy& policy, int bins,
                                   std::size_t num_dims, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("pid_diagnostic: empty dataset");
  if (num_dims == 0) throw std::invalid_argument("pid_diagnostic: num_dims must be >= 1");

  std::size_t n = data.size();
  std::vector<ImageSample> v1, v2;
  v1.reserve(n);
  v2.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream({seed, kStreamDiag, i});
    auto views = make_views(data[i], policy, rng);
    v1.push_back(std::move(views.first));
    v2.push_back(std::move(views.second));
  }
  Matrix e1 = forward(spec, params, flatten_samples(v1)).encoder_out;
  Matrix e2 = forward(spec, params, flatten_samples(v2)).encoder_out;

  // Top dimensions by variance of the first view's encodings.
  std::size_t enc_dim = e1.cols();
  num_dims = std::min(num_dims, enc_dim);
  std::vector<double> mu(enc_dim, 0.0), var(enc_dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t cD = 0; cD < enc_dim; ++cD) mu[cD] += e1(r, cD);
  for (double& v : mu) v /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t cD = 0; cD < enc_dim; ++cD) {
      double dv = e1(r, cD) - mu[cD];
      var[cD] += dv * dv;
    }
  std::vector<std::size_t> order(enc_dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
  std::vector<std::size_t> dims(order.begin(), order.begin() + num_dims);

  std::vector<int> s1 = quantize_embeddings(EmbeddingBatch(e1), dims, bins);
  std::vector<int> s2 = quantize_embeddings(EmbeddingBatch(e2), dims, bins);
  std::vector<int> labels = sample_labels(data);

  PidDiagnosticReport report;
  report.bins = bins;
  report.dims_used = dims;
  report.sample_count = n;
  report.decomposition = decompose(estimate_joint(s1, s2, labels));

  std::vector<int> shuffled(labels);
  Rng ctl_rng = Rng::stream({seed, kStreamDiag, 0xC0C0});
  std::vector<std::uint32_t> perm = ctl_rng.permutation(static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) shuffled[i] = labels[perm[i]];
  report.control = decompose(estimate_joint(s1, s2, shuffled));
  return report;
}

}  // namespace pidssl
