// Independent reference computations for the tests. Nothing here calls the
// library's algorithms; fields are plain coefficient maps.
#ifndef KCLF_TESTS_ORACLES_HPP
#define KCLF_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Exps = std::vector<int>;
using Poly = std::map<Exps, Complex>;  // exponent vector -> coefficient
using Field = std::vector<Poly>;       // one Poly per component
using CMatrix = Eigen::MatrixXcd;

inline int degree(const Exps& a) {
  int d = 0;
  for (int x : a) d += x;
  return d;
}

// All exponent vectors with |a| <= N, sorted: degree first, then larger
// leading exponent first.
inline std::vector<Exps> sorted_basis(int n, int N) {
  std::vector<Exps> all;
  Exps v(n, 0);
  while (true) {
    if (degree(v) <= N) all.push_back(v);
    int p = 0;
    while (p < n && ++v[p] > N) v[p++] = 0;
    if (p == n) break;
  }
  std::sort(all.begin(), all.end(), [](const Exps& a, const Exps& b) {
    if (degree(a) != degree(b)) return degree(a) < degree(b);
    return a > b;
  });
  return all;
}

inline void add(Poly& p, const Exps& a, Complex c) {
  p[a] += c;
  if (p[a] == Complex(0)) p.erase(a);
}

inline Poly mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      Exps e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      add(out, e, ca * cb);
    }
  return out;
}

inline Poly diff(const Poly& p, int m) {
  Poly out;
  for (const auto& [e, c] : p) {
    if (e[m] == 0) continue;
    Exps f = e;
    --f[m];
    add(out, f, c * static_cast<double>(e[m]));
  }
  return out;
}

// L_F applied to z^alpha: sum_l F_l * d/dz_l z^alpha.
inline Poly generator_on_monomial(const Field& F, const Exps& alpha) {
  Poly mono{{alpha, 1.0}}, out;
  for (std::size_t l = 0; l < F.size(); ++l)
    for (const auto& [e, c] : mul(F[l], diff(mono, static_cast<int>(l)))) add(out, e, c);
  return out;
}

inline Complex coeff(const Poly& p, const Exps& a) {
  auto it = p.find(a);
  return it == p.end() ? Complex(0) : it->second;
}

// [F, G]_l = sum_m F_m dG_l/dz_m - G_m dF_l/dz_m.
inline Field bracket(const Field& F, const Field& G) {
  const int n = static_cast<int>(F.size());
  Field out(n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      for (const auto& [e, c] : mul(F[m], diff(G[l], m))) add(out[l], e, c);
      for (const auto& [e, c] : mul(G[m], diff(F[l], m))) add(out[l], e, -c);
    }
  return out;
}

inline CMatrix linear_part(const Field& F) {
  const int n = static_cast<int>(F.size());
  CMatrix J = CMatrix::Zero(n, n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      Exps e(n, 0);
      e[m] = 1;
      J(l, m) = coeff(F[l], e);
    }
  return J;
}

inline Complex eval(const Poly& p, const Eigen::VectorXcd& z) {
  Complex s = 0;
  for (const auto& [e, c] : p) {
    Complex t = c;
    for (std::size_t i = 0; i < e.size(); ++i) t *= std::pow(z[static_cast<Eigen::Index>(i)], e[i]);
    s += t;
  }
  return s;
}

struct Rng {
  explicit Rng(unsigned seed) : g(seed) {}
  double uniform(double lo = -1, double hi = 1) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
  }
  Complex complex() { return {uniform(), uniform()}; }
  int below(int m) { return std::uniform_int_distribution<int>(0, m - 1)(g); }
  std::mt19937 g;
};

// Random field of max degree `deg` with no constant term. If upper, the
// linear part is upper triangular; density is the chance a monomial is kept.
inline Field random_field(Rng& rng, int n, int deg, bool upper, double density = 0.6) {
  Field F(n);
  for (int l = 0; l < n; ++l)
    for (const Exps& e : sorted_basis(n, deg)) {
      const int d = degree(e);
      if (d == 0) continue;
      if (d == 1) {
        const int m = static_cast<int>(std::find(e.begin(), e.end(), 1) - e.begin());
        if (upper && m < l) continue;
        add(F[l], e, m == l ? Complex(-1.0 - rng.uniform(0, 1), rng.uniform()) : rng.complex());
        continue;
      }
      if (rng.uniform(0, 1) < density) add(F[l], e, rng.complex());
    }
  return F;
}

// Matrix exponential: scaling and squaring around a long Taylor series.
inline CMatrix expm(const CMatrix& A) {
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.1) ++s;
  const CMatrix B = A / std::pow(2.0, s);
  CMatrix term = CMatrix::Identity(A.rows(), A.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * B / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

inline Eigen::VectorXcd vec(const CMatrix& M) {
  return Eigen::Map<const Eigen::VectorXcd>(M.data(), M.size());
}

inline int rank_of(const std::vector<CMatrix>& mats, double tol) {
  if (mats.empty()) return 0;
  CMatrix S(mats.front().size(), static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) S.col(static_cast<Eigen::Index>(i)) = vec(mats[i]);
  Eigen::JacobiSVD<CMatrix> svd(S);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * std::max(1.0, sv[0])) ++r;
  return r;
}

// Orthonormal basis (as matrices) of span(mats), from the left singular vectors.
inline std::vector<CMatrix> span_basis(const std::vector<CMatrix>& mats, double tol) {
  std::vector<CMatrix> out;
  if (mats.empty()) return out;
  const Eigen::Index rows = mats.front().rows(), cols = mats.front().cols();
  CMatrix S(rows * cols, static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) S.col(static_cast<Eigen::Index>(i)) = vec(mats[i]);
  Eigen::JacobiSVD<CMatrix> svd(S, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * std::max(1.0, sv[0]))
      out.push_back(Eigen::Map<const CMatrix>(svd.matrixU().col(i).data(), rows, cols));
  return out;
}

// Dimension of the Lie algebra generated by gens: keep adding every
// pairwise commutator until the rank stops growing.
inline int closure_dim(std::vector<CMatrix> gens, double tol = 1e-9) {
  int r = rank_of(gens, tol);
  while (true) {
    const std::size_t m = gens.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) gens.push_back(gens[i] * gens[j] - gens[j] * gens[i]);
    gens = span_basis(gens, tol);
    const int r2 = static_cast<int>(gens.size());
    if (r2 == r) return r;
    r = r2;
  }
}

// Dimensions of the derived series of span(gens) (closure assumed), ending
// at 0 or at the first repeated dimension.
inline std::vector<int> derived_dims(std::vector<CMatrix> g, double tol = 1e-9) {
  g = span_basis(g, tol);
  std::vector<int> dims{static_cast<int>(g.size())};
  for (int step = 0; step < 10 && dims.back() > 0; ++step) {
    std::vector<CMatrix> next;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) next.push_back(g[i] * g[j] - g[j] * g[i]);
    const int r = rank_of(next, tol);
    const bool stalled = r == dims.back();
    dims.push_back(r);  // a stall is recorded once
    if (stalled) break;
    g = span_basis(next, tol);
  }
  return dims;
}

inline std::vector<Complex> sorted_eigenvalues(const CMatrix& A) {
  Eigen::ComplexEigenSolver<CMatrix> es(A);
  std::vector<Complex> v(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

inline CMatrix random_invertible(Rng& rng, int n) {
  CMatrix S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = rng.complex();
  S += 2.0 * CMatrix::Identity(n, n);
  return S;
}

// Example 1 worst coupled Q (xi-free) at degree d: the ((d,0), (d-1,0)) pair.
inline double example1_q(double a, double b, int d) { return 9.0 * b * b * (d - 1) / (a * a * d); }

inline double example2_rho(double mu) { return 1.0 / (1.0 + (std::cosh(2.0) + 1.0) / (2.0 * mu)); }

}  // namespace oracle

#endif  // KCLF_TESTS_ORACLES_HPP
