#ifndef KCLF_KOOPMAN_HPP
#define KCLF_KOOPMAN_HPP

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Sparse>

#include "kclf/multiindex.hpp"
#include "kclf/vectorfield.hpp"

namespace kclf {

/// Koopman data contradicts the structure its inputs guarantee.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseRowMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Mutation fixture for the self-test: when set, contributions through the
/// last component enter with the wrong sign.
struct KoopmanBuildOptions {
  bool mutate_entry_sign = false;
};

/// Truncated generator matrix in the monomial basis with the constant
/// monomial removed: entries(k-1, j-1) = <L_F e_k, e_j> for basis indices
/// k, j >= 1.
struct KoopmanMatrix {
  std::shared_ptr<const MultiIndexBasis> basis;
  SparseRowMatrix entries;
  int field_degree = 0;
  /// N - deg F + 1: rows k with |alpha(k)| <= exact_degree keep every
  /// nonzero entry of the infinite matrix.
  int exact_degree = 0;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  /// Entry by basis indices k, j >= 1.
  Complex operator()(std::size_t k, std::size_t j) const {
    return entries.coeff(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(j - 1));
  }
  CMatrix dense() const { return CMatrix(entries); }
};

/// <L_F e_k, e_j> from the closed-form coefficient formula; k, j >= 1.
Complex entry(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t k,
              std::size_t j, const KoopmanBuildOptions& options = {});

KoopmanMatrix build_matrix(const PolyVectorField& F,
                           std::shared_ptr<const MultiIndexBasis> basis,
                           const KoopmanBuildOptions& options = {});
KoopmanMatrix build_matrix(const PolyVectorField& F, const MultiIndexBasis& basis,
                           const KoopmanBuildOptions& options = {});

/// True iff every strictly lower entry has modulus <= tol.
bool verify_triangular(const KoopmanMatrix& K, double tol);

/// lambda_j = sum_l alpha_l(j) lambda_tilde_l for basis indices 1..M, in
/// matrix order. Throws StructuralError if the diagonal disagrees.
CVector diagonal_eigenvalues(const KoopmanMatrix& K, const CVector& lambda_tilde);

/// sum_k |<L_F e_k, e_j>| over all k, from the coefficients (exact).
double row_abs_sum(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t j);

/// sum_l alpha_l(k) * ||F_l||_1, using recorded tail norms when present.
/// Upper bound for the column sum; equality unless two coefficients land
/// on the same target monomial.
double col_abs_sum(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t k);

/// Dense CSV dump, row-major, complex literals like "-1.5+0.25i".
std::string to_csv(const KoopmanMatrix& K);

/// Shortest round-trip "re+imi" literal.
std::string complex_literal(Complex c);

}  // namespace kclf

#endif  // KCLF_KOOPMAN_HPP
