#ifndef KCLF_MULTIINDEX_HPP
#define KCLF_MULTIINDEX_HPP

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <unordered_map>
#include <vector>

namespace kclf {

/// Exponent vector of a monomial z^alpha on C^n.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  MultiIndex(std::initializer_list<int> exponents);

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
  static MultiIndex unit(int n, int l);

  int dimension() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int l) const { return exponents_[l]; }
  const std::vector<int>& exponents() const { return exponents_; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.exponents_ == b.exponents_;
  }

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Strict total order on monomials: by total degree first, then the
/// first differing exponent, larger exponent first.
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return graded_lex_less(a, b);
  }
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const noexcept;
};

/// Componentwise a + b.
MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);

/// Returns (gamma - alpha) with +1 added at slot l (0-based), or empty if
/// any entry is negative. This is the exponent of the field coefficient
/// that maps z^alpha onto z^gamma through component l.
std::optional<MultiIndex> shift_index(const MultiIndex& alpha, int l,
                                      const MultiIndex& gamma);

/// Number of monomials of total degree <= max_degree in n variables.
std::size_t basis_size(int n, int max_degree);

/// Immutable enumeration of all monomials with |alpha| <= N in graded
/// lexicographic order. Index 0 is the constant monomial.
class MultiIndexBasis {
 public:
  MultiIndexBasis(int n, int max_degree);

  int dimension() const { return n_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return table_.size(); }

  const MultiIndex& operator[](std::size_t k) const { return table_[k]; }
  const std::vector<MultiIndex>& table() const { return table_; }

  std::optional<std::size_t> index_of(const MultiIndex& alpha) const;

  /// First linear index with total degree d (d in [0, N+1]).
  std::size_t degree_offset(int d) const { return offsets_[d]; }

  /// For k >= 1: a pair (parent, l) with alpha(k) = alpha(parent) + e_l.
  /// Lets monomial values be built with one multiplication each.
  std::size_t parent(std::size_t k) const { return parents_[k].first; }
  int parent_slot(std::size_t k) const { return parents_[k].second; }

 private:
  int n_;
  int max_degree_;
  std::vector<MultiIndex> table_;
  std::vector<std::size_t> offsets_;
  std::vector<std::pair<std::size_t, int>> parents_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> inverse_;
};

/// Evaluates every basis monomial at z; out[k] = z^alpha(k).
template <typename Scalar, typename Vec>
void evaluate_monomials(const MultiIndexBasis& basis, const Vec& z,
                        std::vector<Scalar>& out) {
  out.resize(basis.size());
  out[0] = Scalar(1);
  for (std::size_t k = 1; k < basis.size(); ++k)
    out[k] = out[basis.parent(k)] * z[basis.parent_slot(k)];
}

}  // namespace kclf

#endif  // KCLF_MULTIINDEX_HPP
