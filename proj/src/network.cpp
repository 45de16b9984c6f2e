#include "pidssl/network.hpp"

#include <cmath>
#include <stdexcept>

#include "pidssl/rng.hpp"

namespace pidssl {

void MlpSpec::validate() const {
  if (layer_widths.size() < 3)
    throw std::invalid_argument("mlp spec: need at least 2 layers");
  for (std::size_t w : layer_widths)
    if (w == 0) throw std::invalid_argument("mlp spec: zero layer width");
  if (encoder_cut < 1 || encoder_cut >= num_layers())
    throw std::invalid_argument("mlp spec: encoder_cut out of range");
}

bool ModelParams::all_finite() const {
  for (const Matrix& w : weights)
    if (!w.all_finite()) return false;
  for (const auto& b : biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

ModelParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelParams p;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    std::size_t fan_in = spec.layer_widths[l];
    std::size_t fan_out = spec.layer_widths[l + 1];
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng = Rng::stream({seed, kStreamInit, l});
    Matrix w(fan_in, fan_out);
    for (double& v : w.raw()) v = rng.uniform(-limit, limit);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  return p;
}

namespace {
inline double activate(double z, Activation a) {
  return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}
inline double activate_deriv(double z, Activation a) {
  if (a == Activation::Relu) return z > 0.0 ? 1.0 : 0.0;
  double t = std::tanh(z);
  return 1.0 - t * t;
}

Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
  Matrix y = matmul(x, w);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double* row = y.row_ptr(r);
    for (std::size_t c = 0; c < y.cols(); ++c) row[c] += b[c];
  }
  return y;
}
}  // namespace

ForwardResult forward(const MlpSpec& spec, const ModelParams& params,
                      const Matrix& batch, ForwardCache* cache) {
  spec.validate();
  if (params.num_layers() != spec.num_layers())
    throw std::invalid_argument("forward: params do not match spec");
  if (batch.cols() != spec.input_dim())
    throw std::invalid_argument("forward: input width mismatch");

  std::size_t nl = spec.num_layers();
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->post.clear();
  }
  Matrix x = batch;
  Matrix encoder_out;
  for (std::size_t l = 0; l < nl; ++l) {
    Matrix z = affine(x, params.weights[l], params.biases[l]);
    if (cache) cache->pre.push_back(z);
    if (l + 1 < nl) {
      for (double& v : z.raw()) v = activate(v, spec.activation);
    }
    if (l + 1 == spec.encoder_cut) encoder_out = z;
    if (cache) cache->post.push_back(z);
    x = std::move(z);
  }
  return ForwardResult{std::move(x), std::move(encoder_out)};
}

ModelGrads backward(const MlpSpec& spec, const ModelParams& params,
                    const ForwardCache& cache, const Matrix& d_embeddings) {
  std::size_t nl = spec.num_layers();
  if (cache.pre.size() != nl || cache.post.size() != nl)
    throw std::invalid_argument("backward: cache does not match spec");
  if (!d_embeddings.same_shape(cache.post.back()))
    throw std::invalid_argument("backward: upstream gradient shape mismatch");

  ModelGrads g;
  g.weights.resize(nl);
  g.biases.resize(nl);

  Matrix delta = d_embeddings;  // dL/d(pre-activation of last layer): last is linear
  for (std::size_t l = nl; l-- > 0;) {
    const Matrix& layer_in = (l == 0) ? cache.input : cache.post[l - 1];
    g.weights[l] = matmul_trans_a(layer_in, delta);
    g.biases[l].assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* row = delta.row_ptr(r);
      for (std::size_t c = 0; c < delta.cols(); ++c) g.biases[l][c] += row[c];
    }
    if (l == 0) break;
    Matrix dprev = matmul_trans_b(delta, params.weights[l]);
    const Matrix& zprev = cache.pre[l - 1];
    for (std::size_t r = 0; r < dprev.rows(); ++r) {
      double* row = dprev.row_ptr(r);
      const double* z = zprev.row_ptr(r);
      for (std::size_t c = 0; c < dprev.cols(); ++c)
        row[c] *= activate_deriv(z[c], spec.activation);
    }
    delta = std::move(dprev);
  }
  return g;
}

void grads_accumulate(ModelGrads& into, const ModelGrads& other) {
  if (into.weights.empty()) {
    into = other;
    return;
  }
  if (into.weights.size() != other.weights.size())
    throw std::invalid_argument("grads_accumulate: layer count mismatch");
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += other.weights[l];
    for (std::size_t c = 0; c < into.biases[l].size(); ++c)
      into.biases[l][c] += other.biases[l][c];
  }
}

AdamState AdamState::init(const ModelParams& params) {
  AdamState s;
  for (const Matrix& w : params.weights) {
    s.m_w.emplace_back(w.rows(), w.cols());
    s.v_w.emplace_back(w.rows(), w.cols());
  }
  for (const auto& b : params.biases) {
    s.m_b.emplace_back(b.size(), 0.0);
    s.v_b.emplace_back(b.size(), 0.0);
  }
  return s;
}

void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               std::size_t first_trainable_layer) {
  if (grads.weights.size() != params.num_layers())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto update = [&](double& p, double g, double& m, double& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    double mhat = m / bc1;
    double vhat = v / bc2;
    p -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) + state.weight_decay * p);
  };

  for (std::size_t l = first_trainable_layer; l < params.num_layers(); ++l) {
    auto& w = params.weights[l].raw();
    const auto& gw = grads.weights[l].raw();
    auto& mw = state.m_w[l].raw();
    auto& vw = state.v_w[l].raw();
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);

    auto& b = params.biases[l];
    const auto& gb = grads.biases[l];
    auto& mb = state.m_b[l];
    auto& vb = state.v_b[l];
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
}

}  // namespace pidssl
