#include "kclf/koopman.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

namespace kclf {

namespace {

double sign_for(int l, int n, const KoopmanBuildOptions& options) {
  return options.mutate_entry_sign && l == n - 1 ? -1.0 : 1.0;
}

void check_index(const MultiIndexBasis& basis, std::size_t k, const char* what) {
  if (k == 0 || k >= basis.size())
    throw std::out_of_range(std::string(what) + ": basis index out of range");
}

}  // namespace

Complex entry(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t k,
              std::size_t j, const KoopmanBuildOptions& options) {
  check_index(basis, k, "entry");
  check_index(basis, j, "entry");
  const MultiIndex& ak = basis[k];
  const MultiIndex& aj = basis[j];
  if (aj.degree() < ak.degree()) return Complex(0.0);
  const int n = basis.dimension();
  Complex sum(0.0);
  for (int l = 0; l < n; ++l) {
    if (ak[l] == 0) continue;
    auto beta = shift_index(ak, l, aj);
    if (!beta) continue;
    sum += sign_for(l, n, options) * static_cast<double>(ak[l]) * F.component(l).coefficient(*beta);
  }
  return sum;
}

KoopmanMatrix build_matrix(const PolyVectorField& F,
                           std::shared_ptr<const MultiIndexBasis> basis,
                           const KoopmanBuildOptions& options) {
  if (basis->max_degree() < 1)
    throw std::invalid_argument("build_matrix: truncation degree must be >= 1");
  if (basis->dimension() != F.dimension())
    throw std::invalid_argument("build_matrix: dimension mismatch");
  const int n = F.dimension();
  const std::size_t M = basis->size() - 1;

  // Scatter: coefficient a_{l,beta} sends z^alpha(k) to z^(alpha(k)+beta-e_l).
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t k = 1; k <= M; ++k) {
    const MultiIndex& ak = (*basis)[k];
    for (int l = 0; l < n; ++l) {
      if (ak[l] == 0) continue;
      const double factor = sign_for(l, n, options) * static_cast<double>(ak[l]);
      for (const auto& [beta, c] : F.component(l).terms()) {
        std::vector<int> e(ak.exponents());
        for (int m = 0; m < n; ++m) e[m] += beta[m];
        --e[l];
        auto j = basis->index_of(MultiIndex(std::move(e)));
        if (!j) continue;
        triplets.emplace_back(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(*j - 1),
                              factor * c);
      }
    }
  }

  KoopmanMatrix K;
  K.basis = std::move(basis);
  K.entries.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  K.entries.setFromTriplets(triplets.begin(), triplets.end());
  K.entries.prune(Complex(0.0));
  K.field_degree = F.degree();
  K.exact_degree = K.basis->max_degree() - F.degree() + 1;
  return K;
}

KoopmanMatrix build_matrix(const PolyVectorField& F, const MultiIndexBasis& basis,
                           const KoopmanBuildOptions& options) {
  return build_matrix(F, std::make_shared<const MultiIndexBasis>(basis), options);
}

bool verify_triangular(const KoopmanMatrix& K, double tol) {
  for (Eigen::Index r = 0; r < K.entries.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(K.entries, r); it; ++it)
      if (it.col() < r && std::abs(it.value()) > tol) return false;
  return true;
}

CVector diagonal_eigenvalues(const KoopmanMatrix& K, const CVector& lambda_tilde) {
  const MultiIndexBasis& basis = *K.basis;
  if (lambda_tilde.size() != basis.dimension())
    throw std::invalid_argument("diagonal_eigenvalues: dimension mismatch");
  const std::size_t M = K.size();
  CVector lam(static_cast<Eigen::Index>(M));
  for (std::size_t j = 1; j <= M; ++j) {
    Complex s(0.0);
    for (int l = 0; l < basis.dimension(); ++l)
      s += static_cast<double>(basis[j][l]) * lambda_tilde[l];
    const Complex d = K(j, j);
    if (std::abs(d - s) > 1e-12 * std::max(1.0, std::abs(s)))
      throw StructuralError("diagonal_eigenvalues: Koopman diagonal disagrees with the "
                            "Jacobian eigenvalue sums at index " + std::to_string(j));
    lam[static_cast<Eigen::Index>(j - 1)] = s;
  }
  return lam;
}

double row_abs_sum(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t j) {
  check_index(basis, j, "row_abs_sum");
  const MultiIndex& aj = basis[j];
  const int n = basis.dimension();
  // Group by source k because several coefficients can reach the same one.
  std::map<MultiIndex, Complex, GradedLexLess> by_source;
  for (int l = 0; l < n; ++l) {
    for (const auto& [beta, c] : F.component(l).terms()) {
      std::vector<int> e(aj.exponents());
      bool ok = true;
      for (int m = 0; m < n; ++m) {
        e[m] += (m == l ? 1 : 0) - beta[m];
        ok = ok && e[m] >= 0;
      }
      if (!ok) continue;
      MultiIndex ak(std::move(e));
      if (ak.degree() == 0) continue;
      by_source[ak] += static_cast<double>(ak[l]) * c;
    }
  }
  double s = 0.0;
  for (const auto& [ak, v] : by_source) s += std::abs(v);
  return s;
}

double col_abs_sum(const PolyVectorField& F, const MultiIndexBasis& basis, std::size_t k) {
  check_index(basis, k, "col_abs_sum");
  double s = 0.0;
  for (int l = 0; l < basis.dimension(); ++l)
    if (basis[k][l] > 0) s += basis[k][l] * F.l1_norm(l);
  return s;
}

std::string complex_literal(Complex c) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), c.real());
  std::string out(buf, r.ptr);
  const double im = c.imag();
  if (!std::signbit(im)) out += '+';
  r = std::to_chars(buf, buf + sizeof(buf), im);
  out.append(buf, r.ptr);
  out += 'i';
  return out;
}

std::string to_csv(const KoopmanMatrix& K) {
  const CMatrix D = K.dense();
  std::ostringstream os;
  for (Eigen::Index r = 0; r < D.rows(); ++r) {
    for (Eigen::Index c = 0; c < D.cols(); ++c) {
      if (c) os << ',';
      os << complex_literal(D(r, c));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace kclf
