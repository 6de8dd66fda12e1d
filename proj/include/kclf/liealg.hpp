#ifndef KCLF_LIEALG_HPP
#define KCLF_LIEALG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kclf/vectorfield.hpp"

namespace kclf {

/// No common eigenvector exists at some deflation stage.
class NotSimultaneouslyTriangularizable : public std::runtime_error {
 public:
  NotSimultaneouslyTriangularizable(const std::string& what, int stage)
      : std::runtime_error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

/// A diagonal entry of some triangular form has non-negative real part.
class NotHurwitz : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline CMatrix commutator(const CMatrix& A, const CMatrix& B) { return A * B - B * A; }

struct MatrixLieAlgebra {
  std::vector<CMatrix> generators;
  /// Frobenius-orthonormal spanning set.
  std::vector<CMatrix> basis;
  int dim = 0;
};

/// Frobenius-orthonormal basis of span(mats); directions with singular
/// value <= threshold are dropped.
std::vector<CMatrix> orthonormal_span(const std::vector<CMatrix>& mats, double threshold);

MatrixLieAlgebra close_under_bracket(const std::vector<CMatrix>& generators,
                                     double tol = 1e-10);

struct SolvabilityResult {
  bool solvable = false;
  /// dim g, dim g^1, dim g^2, ... until 0 or stagnation.
  std::vector<int> derived_dims;
};

SolvabilityResult is_solvable(const MatrixLieAlgebra& g, double tol = 1e-10);

struct TriangularizationResult {
  /// P = s U with U unitary and s chosen so that ||P_inv||_inf = 1.
  CMatrix P;
  CMatrix P_inv;
  CMatrix flag;  // U
  std::vector<CMatrix> T_list;
  std::vector<CVector> eigenvalues;
  double residual = 0.0;
  double condition = 1.0;
};

/// Lie's theorem made constructive: repeated common-eigenvector extraction
/// and unitary deflation. Throws NotSimultaneouslyTriangularizable.
TriangularizationResult simultaneous_triangularize(const std::vector<CMatrix>& A_list,
                                                   double tol = 1e-10);

/// Max modulus strictly below the diagonal.
double strictly_lower_max(const CMatrix& T);

bool diagonals_hurwitz(const TriangularizationResult& tri);

struct LinearClf {
  Eigen::VectorXd epsilon;
  CMatrix flag;

  /// V(x) = sum_j eps_j |v_j^H x|^2.
  double operator()(const CVector& x) const;
};

/// Weights for the quadratic CLF of a triangularized linear family.
/// Throws NotHurwitz.
LinearClf linear_clf(const TriangularizationResult& tri, double eta = 0.5);

}  // namespace kclf

#endif  // KCLF_LIEALG_HPP
