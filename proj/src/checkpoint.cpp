#include "pidssl/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "pidssl/errors.hpp"

namespace pidssl {

namespace {

constexpr char kMagic[8] = {'P', 'I', 'D', 'S', 'S', 'L', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<char*>(b), 8);
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t v = get_u64(in);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.raw()) put_f64(out, v);
}

Matrix get_matrix(std::istream& in) {
  std::uint64_t r = get_u64(in), c = get_u64(in);
  Matrix m(r, c);
  for (double& v : m.raw()) v = get_f64(in);
  return m;
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double x : v) put_f64(out, x);
}

std::vector<double> get_vec(std::istream& in) {
  std::uint64_t n = get_u64(in);
  std::vector<double> v(n);
  for (double& x : v) x = get_f64(in);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  namespace fs = std::filesystem;
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, ckpt.phase);

    put_u32(out, ckpt.spec.activation == Activation::Relu ? 0u : 1u);
    put_u64(out, ckpt.spec.encoder_cut);
    put_u64(out, ckpt.spec.layer_widths.size());
    for (std::size_t w : ckpt.spec.layer_widths) put_u64(out, w);

    put_u64(out, ckpt.params.num_layers());
    for (std::size_t l = 0; l < ckpt.params.num_layers(); ++l) {
      put_matrix(out, ckpt.params.weights[l]);
      put_vec(out, ckpt.params.biases[l]);
    }

    put_u64(out, ckpt.adam.step);
    put_f64(out, ckpt.adam.lr);
    put_f64(out, ckpt.adam.beta1);
    put_f64(out, ckpt.adam.beta2);
    put_f64(out, ckpt.adam.eps);
    put_f64(out, ckpt.adam.weight_decay);
    for (std::size_t l = 0; l < ckpt.params.num_layers(); ++l) {
      put_matrix(out, ckpt.adam.m_w[l]);
      put_matrix(out, ckpt.adam.v_w[l]);
      put_vec(out, ckpt.adam.m_b[l]);
      put_vec(out, ckpt.adam.v_b[l]);
    }

    put_u64(out, ckpt.seed);
    put_u64(out, ckpt.epochs_completed);

    out.put(ckpt.has_target ? 1 : 0);
    if (ckpt.has_target) {
      put_u32(out, static_cast<std::uint32_t>(ckpt.target_kind));
      put_matrix(out, ckpt.target_matrix);
    }
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("not a PIDSSL01 checkpoint: " + path);
  std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.phase = get_u32(in);

  std::uint32_t act = get_u32(in);
  ckpt.spec.activation = act == 0 ? Activation::Relu : Activation::Tanh;
  ckpt.spec.encoder_cut = get_u64(in);
  std::uint64_t nw = get_u64(in);
  ckpt.spec.layer_widths.resize(nw);
  for (auto& w : ckpt.spec.layer_widths) w = get_u64(in);
  ckpt.spec.validate();

  std::uint64_t nl = get_u64(in);
  for (std::uint64_t l = 0; l < nl; ++l) {
    ckpt.params.weights.push_back(get_matrix(in));
    ckpt.params.biases.push_back(get_vec(in));
  }

  ckpt.adam.step = get_u64(in);
  ckpt.adam.lr = get_f64(in);
  ckpt.adam.beta1 = get_f64(in);
  ckpt.adam.beta2 = get_f64(in);
  ckpt.adam.eps = get_f64(in);
  ckpt.adam.weight_decay = get_f64(in);
  for (std::uint64_t l = 0; l < nl; ++l) {
    ckpt.adam.m_w.push_back(get_matrix(in));
    ckpt.adam.v_w.push_back(get_matrix(in));
    ckpt.adam.m_b.push_back(get_vec(in));
    ckpt.adam.v_b.push_back(get_vec(in));
  }

  ckpt.seed = get_u64(in);
  ckpt.epochs_completed = get_u64(in);

  int has_target = in.get();
  if (has_target == EOF) throw std::runtime_error("checkpoint: truncated");
  ckpt.has_target = has_target != 0;
  if (ckpt.has_target) {
    ckpt.target_kind = static_cast<TargetKind>(get_u32(in));
    ckpt.target_matrix = get_matrix(in);
  }
  return ckpt;
}

}  // namespace pidssl
