#ifndef PIDSSL_PID_HPP
#define PIDSSL_PID_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pidssl/linalg.hpp"
#include "pidssl/matrix.hpp"

namespace pidssl {

// Finite trivariate probability table p(t, s1, s2). Entries are non-negative
// and sum to one; the constructor normalizes exactly after checking the sum
// against `tol`.
class JointDistribution {
 public:
  JointDistribution(std::size_t nt, std::size_t ns1, std::size_t ns2,
                    std::vector<double> probs, double tol = 1e-6);

  std::size_t nt() const { return nt_; }
  std::size_t ns1() const { return ns1_; }
  std::size_t ns2() const { return ns2_; }

  double at(std::size_t t, std::size_t s1, std::size_t s2) const {
    return p_[(t * ns1_ + s1) * ns2_ + s2];
  }

  // Two-variable marginals as dense tables.
  Matrix marginal_t_s1() const;
  Matrix marginal_t_s2() const;
  // T against the joint source symbol (s1, s2) flattened to s1 * ns2 + s2.
  Matrix marginal_t_pair() const;
  std::vector<double> marginal_t() const;

  // Plain-text table: header "T S1 S2 p", one row per nonzero cell.
  static JointDistribution from_table_text(std::istream& in, double tol = 1e-6);
  void to_table_text(std::ostream& out) const;

 private:
  std::size_t nt_, ns1_, ns2_;
  std::vector<double> p_;
};

// The four non-negative components plus the joint mutual information, in bits.
struct PidDecomposition {
  double redundancy = 0.0;
  double unique_s1 = 0.0;
  double unique_s2 = 0.0;
  double synergy = 0.0;
  double joint_mi = 0.0;
};

// I(X;Y) in bits of a two-variable joint table (0 log 0 := 0).
double mutual_information(const Matrix& joint_xy);

// I(T = t; S_source) in bits, source in {1, 2}. Throws when p(t) = 0.
double specific_information(const JointDistribution& joint, int source,
                            std::size_t t);

// Expected source-wise minimum of specific information (Williams-Beer
// redundancy). Terms with p(t) = 0 are skipped.
double i_min(const JointDistribution& joint);

// Full decomposition: redundancy = i_min, uniques by subtraction, synergy as
// the remainder of the joint mutual information.
PidDecomposition decompose(const JointDistribution& joint);

// Equal-frequency quantization of selected embedding dimensions into k bins
// each, combined as a mixed-radix symbol (dims[0] least significant). Equal
// values always land in the same bin. Requires |dims| * log2(k) <= 16.
std::vector<int> quantize_embeddings(const EmbeddingBatch& batch,
                                     const std::vector<std::size_t>& dims,
                                     int bins);

// Empirical joint frequency table from aligned symbol sequences; labels play
// the target role. Alphabet sizes are inferred as max symbol + 1.
JointDistribution estimate_joint(const std::vector<int>& sym1,
                                 const std::vector<int>& sym2,
                                 const std::vector<int>& labels);

}  // namespace pidssl

#endif
