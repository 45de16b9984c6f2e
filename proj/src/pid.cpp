#include "pidssl/pid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pidssl/errors.hpp"

namespace pidssl {

namespace {
constexpr double kInvLn2 = 1.4426950408889634074;  // 1 / ln 2
inline double log2_(double x) { return std::log(x) * kInvLn2; }
}  // namespace

JointDistribution::JointDistribution(std::size_t nt, std::size_t ns1,
                                     std::size_t ns2, std::vector<double> probs,
                                     double tol)
    : nt_(nt), ns1_(ns1), ns2_(ns2), p_(std::move(probs)) {
  if (nt_ < 1 || ns1_ < 1 || ns2_ < 1)
    throw std::invalid_argument("joint distribution: alphabet sizes must be >= 1");
  if (p_.size() != nt_ * ns1_ * ns2_)
    throw std::invalid_argument("joint distribution: table size mismatch");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("joint distribution: entries must be non-negative");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > tol)
    throw std::invalid_argument("joint distribution: probabilities sum to " +
                                std::to_string(sum) + ", not 1");
  for (double& v : p_) v /= sum;
}

Matrix JointDistribution::marginal_t_s1() const {
  Matrix m(nt_, ns1_);
  for (std::size_t t = 0; t < nt_; ++t)
    for (std::size_t a = 0; a < ns1_; ++a)
      for (std::size_t b = 0; b < ns2_; ++b) m(t, a) += at(t, a, b);
  return m;
}

Matrix JointDistribution::marginal_t_s2() const {
  Matrix m(nt_, ns2_);
  for (std::size_t t = 0; t < nt_; ++t)
    for (std::size_t a = 0; a < ns1_; ++a)
      for (std::size_t b = 0; b < ns2_; ++b) m(t, b) += at(t, a, b);
  return m;
}

Matrix JointDistribution::marginal_t_pair() const {
  Matrix m(nt_, ns1_ * ns2_);
  for (std::size_t t = 0; t < nt_; ++t)
    for (std::size_t a = 0; a < ns1_; ++a)
      for (std::size_t b = 0; b < ns2_; ++b) m(t, a * ns2_ + b) = at(t, a, b);
  return m;
}

std::vector<double> JointDistribution::marginal_t() const {
  std::vector<double> m(nt_, 0.0);
  for (std::size_t t = 0; t < nt_; ++t)
    for (std::size_t a = 0; a < ns1_; ++a)
      for (std::size_t b = 0; b < ns2_; ++b) m[t] += at(t, a, b);
  return m;
}

double mutual_information(const Matrix& joint_xy) {
  std::size_t nx = joint_xy.rows(), ny = joint_xy.cols();
  std::vector<double> px(nx, 0.0), py(ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      px[x] += joint_xy(x, y);
      py[y] += joint_xy(x, y);
    }
  double mi = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      double pxy = joint_xy(x, y);
      if (pxy <= 0.0) continue;
      mi += pxy * log2_(pxy / (px[x] * py[y]));
    }
  return std::max(mi, 0.0);
}

double specific_information(const JointDistribution& joint, int source,
                            std::size_t t) {
  if (source != 1 && source != 2)
    throw std::invalid_argument("specific_information: source must be 1 or 2");
  Matrix ts = (source == 1) ? joint.marginal_t_s1() : joint.marginal_t_s2();
  std::size_t ns = ts.cols();
  std::vector<double> ps(ns, 0.0);
  for (std::size_t tt = 0; tt < ts.rows(); ++tt)
    for (std::size_t s = 0; s < ns; ++s) ps[s] += ts(tt, s);
  double pt = 0.0;
  for (std::size_t s = 0; s < ns; ++s) pt += ts(t, s);
  if (pt <= 0.0) throw std::runtime_error("conditioning on zero-probability target");

  // sum_s p(s|t) [log2(1/p(t)) - log2(1/p(t|s))]
  double si = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    double pst = ts(t, s);
    if (pst <= 0.0) continue;
    double p_s_given_t = pst / pt;
    double p_t_given_s = pst / ps[s];
    si += p_s_given_t * (log2_(p_t_given_s) - log2_(pt));
  }
  return si;
}

double i_min(const JointDistribution& joint) {
  std::vector<double> pt = joint.marginal_t();
  double acc = 0.0;
  for (std::size_t t = 0; t < joint.nt(); ++t) {
    if (pt[t] <= 0.0) continue;
    double s1 = specific_information(joint, 1, t);
    double s2 = specific_information(joint, 2, t);
    acc += pt[t] * std::min(s1, s2);
  }
  return acc;
}

PidDecomposition decompose(const JointDistribution& joint) {
  double red = i_min(joint);
  double mi1 = mutual_information(joint.marginal_t_s1());
  double mi2 = mutual_information(joint.marginal_t_s2());
  double joint_mi = mutual_information(joint.marginal_t_pair());
  PidDecomposition out;
  out.redundancy = red;
  out.unique_s1 = mi1 - red;
  out.unique_s2 = mi2 - red;
  out.synergy = joint_mi - mi1 - mi2 + red;
  out.joint_mi = joint_mi;
  return out;
}

std::vector<int> quantize_embeddings(const EmbeddingBatch& batch,
                                     const std::vector<std::size_t>& dims,
                                     int bins) {
  if (bins < 2) throw std::invalid_argument("quantize: bins must be >= 2");
  if (dims.empty()) throw std::invalid_argument("quantize: no dimensions given");
  double alphabet_bits = static_cast<double>(dims.size()) * std::log2(double(bins));
  if (alphabet_bits > 16.0 + 1e-9) throw std::runtime_error("alphabet too large");
  for (std::size_t dim : dims)
    if (dim >= batch.d()) throw std::invalid_argument("quantize: dimension out of range");

  std::size_t n = batch.n();
  std::vector<int> symbols(n, 0);
  int radix = 1;
  std::vector<double> sorted(n);
  for (std::size_t dim : dims) {
    for (std::size_t r = 0; r < n; ++r) sorted[r] = batch.data()(r, dim);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t r = 0; r < n; ++r) {
      // Rank of the first occurrence, so ties share a bin.
      std::size_t rank = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), batch.data()(r, dim)) -
          sorted.begin());
      int bin = static_cast<int>(rank * static_cast<std::size_t>(bins) / n);
      symbols[r] += bin * radix;
    }
    radix *= bins;
  }
  return symbols;
}

JointDistribution estimate_joint(const std::vector<int>& sym1,
                                 const std::vector<int>& sym2,
                                 const std::vector<int>& labels) {
  if (sym1.empty()) throw std::invalid_argument("estimate_joint: empty input");
  if (sym1.size() != sym2.size() || sym1.size() != labels.size())
    throw std::invalid_argument("estimate_joint: length mismatch");
  auto max_of = [](const std::vector<int>& v) {
    int m = 0;
    for (int x : v) {
      if (x < 0) throw std::invalid_argument("estimate_joint: negative symbol");
      m = std::max(m, x);
    }
    return static_cast<std::size_t>(m) + 1;
  };
  std::size_t nt = max_of(labels), n1 = max_of(sym1), n2 = max_of(sym2);
  std::vector<double> counts(nt * n1 * n2, 0.0);
  for (std::size_t i = 0; i < sym1.size(); ++i) {
    std::size_t idx = (static_cast<std::size_t>(labels[i]) * n1 +
                       static_cast<std::size_t>(sym1[i])) *
                          n2 +
                      static_cast<std::size_t>(sym2[i]);
    counts[idx] += 1.0;
  }
  double inv = 1.0 / static_cast<double>(sym1.size());
  for (double& c : counts) c *= inv;
  return JointDistribution(nt, n1, n2, std::move(counts));
}

JointDistribution JointDistribution::from_table_text(std::istream& in, double tol) {
  std::string line;
  std::size_t line_no = 0;
  // header
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream hs(trimmed);
    std::string a, b, c, d, extra;
    hs >> a >> b >> c >> d;
    if (!(a == "T" && b == "S1" && c == "S2" && d == "p") || (hs >> extra))
      throw ConfigError("table line " + std::to_string(line_no) +
                        ": expected header 'T S1 S2 p'");
    break;
  }
  if (in.eof() && line_no == 0) throw ConfigError("table: empty input");

  struct Cell {
    std::size_t t, s1, s2;
    double p;
  };
  std::vector<Cell> cells;
  std::size_t nt = 0, n1 = 0, n2 = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream ls(trimmed);
    long long t, s1, s2;
    double p;
    if (!(ls >> t >> s1 >> s2 >> p) || t < 0 || s1 < 0 || s2 < 0) {
      throw ConfigError("table line " + std::to_string(line_no) +
                        ": expected 'T S1 S2 p' with non-negative indices");
    }
    std::string extra;
    if (ls >> extra)
      throw ConfigError("table line " + std::to_string(line_no) + ": trailing tokens");
    cells.push_back({static_cast<std::size_t>(t), static_cast<std::size_t>(s1),
                     static_cast<std::size_t>(s2), p});
    nt = std::max(nt, static_cast<std::size_t>(t) + 1);
    n1 = std::max(n1, static_cast<std::size_t>(s1) + 1);
    n2 = std::max(n2, static_cast<std::size_t>(s2) + 1);
  }
  if (cells.empty()) throw ConfigError("table: no probability rows");
  std::vector<double> probs(nt * n1 * n2, 0.0);
  for (const Cell& c : cells) probs[(c.t * n1 + c.s1) * n2 + c.s2] += c.p;
  try {
    return JointDistribution(nt, n1, n2, std::move(probs), tol);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void JointDistribution::to_table_text(std::ostream& out) const {
  out << "T S1 S2 p\n";
  out.precision(17);
  for (std::size_t t = 0; t < nt_; ++t)
    for (std::size_t a = 0; a < ns1_; ++a)
      for (std::size_t b = 0; b < ns2_; ++b) {
        double v = at(t, a, b);
        if (v > 0.0) out << t << " " << a << " " << b << " " << v << "\n";
      }
}

}  // namespace pidssl
