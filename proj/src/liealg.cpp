#include "kclf/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace kclf {

std::vector<CMatrix> orthonormal_span(const std::vector<CMatrix>& mats, double threshold) {
  if (mats.empty()) return {};
  const Eigen::Index rows = mats.front().rows(), cols = mats.front().cols();
  CMatrix stacked(rows * cols, static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i)
    stacked.col(static_cast<Eigen::Index>(i)) = mats[i].reshaped();
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeThinU);
  std::vector<CMatrix> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] <= threshold) break;
    out.push_back(svd.matrixU().col(i).reshaped(rows, cols));
  }
  return out;
}

MatrixLieAlgebra close_under_bracket(const std::vector<CMatrix>& generators, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("close_under_bracket: tol must be positive");
  MatrixLieAlgebra g;
  g.generators = generators;
  if (generators.empty()) return g;
  const Eigen::Index n = generators.front().rows();
  double scale = 0.0;
  for (const auto& A : generators) {
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("close_under_bracket: matrices must be square of equal size");
    scale = std::max(scale, A.norm());
  }
  if (scale == 0.0) return g;

  g.basis = orthonormal_span(generators, tol * scale);
  // Basis elements have unit Frobenius norm from here on, so the
  // threshold is absolute.
  while (true) {
    std::vector<CMatrix> candidates = g.basis;
    for (std::size_t i = 0; i < g.basis.size(); ++i)
      for (std::size_t j = i + 1; j < g.basis.size(); ++j)
        candidates.push_back(commutator(g.basis[i], g.basis[j]));
    std::vector<CMatrix> next = orthonormal_span(candidates, tol);
    const bool grew = next.size() > g.basis.size();
    g.basis = std::move(next);
    if (!grew || static_cast<Eigen::Index>(g.basis.size()) >= n * n) break;
  }
  g.dim = static_cast<int>(g.basis.size());
  return g;
}

SolvabilityResult is_solvable(const MatrixLieAlgebra& g, double tol) {
  SolvabilityResult res;
  std::vector<CMatrix> current = g.basis;
  res.derived_dims.push_back(static_cast<int>(current.size()));
  while (!current.empty()) {
    std::vector<CMatrix> brackets;
    for (std::size_t i = 0; i < current.size(); ++i)
      for (std::size_t j = i + 1; j < current.size(); ++j)
        brackets.push_back(commutator(current[i], current[j]));
    std::vector<CMatrix> next = orthonormal_span(brackets, tol);
    res.derived_dims.push_back(static_cast<int>(next.size()));
    if (next.size() >= current.size()) return res;  // stagnated: not solvable
    current = std::move(next);
  }
  res.solvable = true;
  return res;
}

double strictly_lower_max(const CMatrix& T) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < T.cols(); ++c)
    for (Eigen::Index r = c + 1; r < T.rows(); ++r) m = std::max(m, std::abs(T(r, c)));
  return m;
}

namespace {

struct Cluster {
  Complex center;
  int multiplicity;
};

bool complex_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Eigenvalues grouped within `radius`, in (real, imag) order.
std::vector<Cluster> eigen_clusters(const CMatrix& A, double radius) {
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
  std::sort(ev.begin(), ev.end(), complex_less);
  std::vector<std::vector<Complex>> groups;
  for (Complex z : ev) {
    bool placed = false;
    for (auto& grp : groups) {
      if (std::abs(grp.front() - z) <= radius) {
        grp.push_back(z);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({z});
  }
  std::vector<Cluster> out;
  for (const auto& grp : groups) {
    Complex c(0.0);
    for (Complex z : grp) c += z;
    out.push_back({c / static_cast<double>(grp.size()), static_cast<int>(grp.size())});
  }
  return out;
}

// Orthonormal basis (columns) of the approximate null space of A - lambda I.
// At least one direction is always returned.
CMatrix near_null_space(const CMatrix& A, Complex lambda, double threshold) {
  const Eigen::Index k = A.rows();
  const CMatrix M = A - lambda * CMatrix::Identity(k, k);
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index dim = 0;
  for (Eigen::Index i = s.size() - 1; i >= 0 && s[i] <= threshold; --i) ++dim;
  dim = std::max<Eigen::Index>(dim, 1);
  return svd.matrixV().rightCols(dim);
}

// Intersection of two subspaces given by orthonormal columns, via principal
// angles; directions with cosine >= 1 - slack are kept.
CMatrix intersect(const CMatrix& U, const CMatrix& W, double slack) {
  Eigen::JacobiSVD<CMatrix> svd(U.adjoint() * W, Eigen::ComputeThinU);
  Eigen::Index dim = 0;
  while (dim < svd.singularValues().size() && svd.singularValues()[dim] >= 1.0 - slack) ++dim;
  if (dim == 0) return CMatrix(U.rows(), 0);
  CMatrix X = U * svd.matrixU().leftCols(dim);
  Eigen::HouseholderQR<CMatrix> qr(X);
  return qr.householderQ() * CMatrix::Identity(X.rows(), dim);
}

// Unit vector of span(S) closest to a canonical axis; phase fixed so the
// largest entry is real positive.
CVector canonical_vector(const CMatrix& S) {
  const Eigen::Index k = S.rows();
  Eigen::Index best = 0;
  double best_norm = -1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double p = S.row(i).norm();
    if (p > best_norm + 1e-12) {
      best_norm = p;
      best = i;
    }
  }
  CVector v = S * S.row(best).adjoint();
  v.normalize();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::conj(v[imax]) / std::abs(v[imax]);
  return v;
}

double eigen_residual(const std::vector<CMatrix>& A, const CVector& v) {
  double r = 0.0;
  for (const auto& M : A) {
    const CVector Av = M * v;
    const Complex mu = v.dot(Av);
    r = std::max(r, (Av - mu * v).norm() / std::max(1.0, M.norm()));
  }
  return r;
}

// Polishes a common eigenvector: smallest right singular vector of the
// stacked shifted matrices, with shifts from Rayleigh quotients.
CVector refine(const std::vector<CMatrix>& A, CVector v) {
  const Eigen::Index k = v.size();
  for (int it = 0; it < 3; ++it) {
    CMatrix stack(k * static_cast<Eigen::Index>(A.size()), k);
    for (std::size_t i = 0; i < A.size(); ++i) {
      const Complex mu = v.dot(A[i] * v);
      stack.middleRows(static_cast<Eigen::Index>(i) * k, k) =
          (A[i] - mu * CMatrix::Identity(k, k)) / std::max(1.0, A[i].norm());
    }
    Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeFullV);
    CVector w = svd.matrixV().col(k - 1);
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    w *= std::conj(w[imax]) / std::abs(w[imax]);
    if (eigen_residual(A, w) >= eigen_residual(A, v)) break;
    v = w;
  }
  return v;
}

std::optional<CVector> common_eigenvector(const std::vector<CMatrix>& A, double tol) {
  const Eigen::Index k = A.front().rows();
  if (k == 1) return CVector::Ones(1);

  std::vector<std::vector<Cluster>> clusters;
  std::vector<double> scales;
  for (const auto& M : A) {
    const double s = std::max(1.0, M.norm());
    scales.push_back(s);
    // Defective eigenvalues are computed only to about sqrt(machine eps).
    clusters.push_back(eigen_clusters(M, std::max(1e-8, 1e-6 * s)));
  }
  const double accept = std::max(1e-7, 1e3 * tol);

  std::vector<std::size_t> pick(A.size(), 0);
  while (true) {
    CMatrix S = near_null_space(A[0], clusters[0][pick[0]].center, 1e-6 * scales[0]);
    for (std::size_t i = 1; i < A.size() && S.cols() > 0; ++i)
      S = intersect(S, near_null_space(A[i], clusters[i][pick[i]].center, 1e-6 * scales[i]),
                    1e-6);
    if (S.cols() > 0) {
      CVector v = refine(A, canonical_vector(S));
      if (eigen_residual(A, v) <= accept) return v;
    }
    std::size_t i = A.size();
    while (i-- > 0) {
      if (++pick[i] < clusters[i].size()) break;
      pick[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return std::nullopt;
  }
}

// Unitary with first column v.
CMatrix unitary_completion(const CVector& v) {
  const Eigen::Index k = v.size();
  const CMatrix vm = v;
  Eigen::HouseholderQR<CMatrix> qr(vm);
  CMatrix Q = qr.householderQ() * CMatrix::Identity(k, k);
  // First column equals v up to a unimodular phase; make it exactly v.
  const Complex phase = Q.col(0).dot(v);
  Q.col(0) *= phase / std::abs(phase);
  return Q;
}

}  // namespace

TriangularizationResult simultaneous_triangularize(const std::vector<CMatrix>& A_list,
                                                   double tol) {
  if (A_list.empty()) throw std::invalid_argument("simultaneous_triangularize: empty list");
  const Eigen::Index n = A_list.front().rows();
  for (const auto& A : A_list)
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("simultaneous_triangularize: size mismatch");

  TriangularizationResult res;
  const bool already = std::all_of(A_list.begin(), A_list.end(),
                                   [](const CMatrix& A) { return strictly_lower_max(A) == 0.0; });
  CMatrix U = CMatrix::Identity(n, n);
  if (!already) {
    std::vector<CMatrix> current = A_list;
    for (Eigen::Index stage = 0; stage + 1 < n; ++stage) {
      auto v = common_eigenvector(current, tol);
      if (!v)
        throw NotSimultaneouslyTriangularizable(
            "no common eigenvector at deflation stage " + std::to_string(stage),
            static_cast<int>(stage));
      const CMatrix Q = unitary_completion(*v);
      const Eigen::Index k = current.front().rows();
      U.rightCols(k) = U.rightCols(k) * Q;
      for (auto& M : current) M = (Q.adjoint() * M * Q).bottomRightCorner(k - 1, k - 1).eval();
    }
  }

  const double s = U.adjoint().cwiseAbs().rowwise().sum().maxCoeff();
  res.flag = U;
  res.P = s * U;
  res.P_inv = U.adjoint() / s;
  double scale = 0.0;
  for (const auto& A : A_list) {
    CMatrix T = already ? A : CMatrix(U.adjoint() * A * U);
    res.residual = std::max(res.residual, strictly_lower_max(T));
    scale = std::max(scale, A.cwiseAbs().maxCoeff());
    // The strictly lower part is roundoff; the triangular form is what
    // later stages consume.
    T.triangularView<Eigen::StrictlyLower>().setZero();
    res.eigenvalues.push_back(T.diagonal());
    res.T_list.push_back(std::move(T));
  }
  Eigen::JacobiSVD<CMatrix> svd(res.P);
  const auto& sv = svd.singularValues();
  res.condition = sv[0] / sv[sv.size() - 1];
  if (res.residual > std::max(1e-7, 1e3 * tol) * std::max(1.0, scale))
    throw NotSimultaneouslyTriangularizable(
        "triangular residual " + std::to_string(res.residual) + " exceeds tolerance", -1);
  return res;
}

bool diagonals_hurwitz(const TriangularizationResult& tri) {
  for (const auto& ev : tri.eigenvalues)
    for (Eigen::Index j = 0; j < ev.size(); ++j)
      if (!(ev[j].real() < 0.0)) return false;
  return true;
}

double LinearClf::operator()(const CVector& x) const {
  const CVector y = flag.adjoint() * x;
  double v = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) v += epsilon[j] * std::norm(y[j]);
  return v;
}

LinearClf linear_clf(const TriangularizationResult& tri, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("linear_clf: eta must be positive");
  if (!diagonals_hurwitz(tri))
    throw NotHurwitz("linear_clf: triangular form has a diagonal entry with Re >= 0");
  const Eigen::Index n = tri.flag.rows();
  const double c = static_cast<double>((n - 1) * (n - 1)) / 4.0;
  LinearClf clf;
  clf.flag = tri.flag;
  clf.epsilon = Eigen::VectorXd::Ones(n);
  for (Eigen::Index j = 1; j < n; ++j) {
    double bound = 0.0;
    for (const auto& T : tri.T_list)
      for (Eigen::Index k = 0; k < j; ++k)
        bound = std::max(bound, clf.epsilon[k] * c * std::norm(T(k, j)) /
                                    (std::abs(T(j, j).real()) * std::abs(T(k, k).real())));
    clf.epsilon[j] = bound > 0.0 ? (1.0 + eta) * bound : 1.0;
  }
  return clf;
}

}  // namespace kclf
