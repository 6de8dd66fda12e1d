#ifndef KCLF_VECTORFIELD_HPP
#define KCLF_VECTORFIELD_HPP

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kclf/multiindex.hpp"

namespace kclf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Raised when an integrator produces NaN or Inf.
class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse complex polynomial in n variables.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, Complex, GradedLexLess>;

  explicit Polynomial(int n) : n_(n) {}

  int dimension() const { return n_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  Complex coefficient(const MultiIndex& alpha) const;
  /// Adds c to the coefficient of z^alpha; exact zeros are removed.
  void add_term(const MultiIndex& alpha, Complex c);

  Polynomial derivative(int m) const;
  Complex evaluate(const CVector& z) const;

  /// Drops coefficients with |c| <= tol.
  void prune(double tol);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(Complex s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }
  friend Polynomial operator*(Complex s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  int n_;
  Terms terms_;
};

/// Complex polynomial (or degree-truncated analytic) vector field with
/// F(0) = 0. Component l carries an optional exact l1 norm of its full
/// coefficient sequence for analytic fields whose Taylor series was cut.
class PolyVectorField {
 public:
  PolyVectorField(std::vector<Polynomial> components,
                  std::vector<std::optional<double>> tail_l1 = {});

  int dimension() const { return static_cast<int>(components_.size()); }
  int degree() const { return degree_; }
  const Polynomial& component(int l) const { return components_[l]; }
  const std::vector<Polynomial>& components() const { return components_; }

  const std::optional<double>& tail_l1(int l) const { return tail_l1_[l]; }
  bool has_tail(int l) const { return tail_l1_[l].has_value(); }
  bool has_any_tail() const;

  /// Sum of |a_{l,beta}| over stored coefficients of component l.
  double stored_l1(int l) const;
  /// Exact l1 norm when a tail is recorded, otherwise the stored sum.
  double l1_norm(int l) const;

  /// Count of nonzero coefficients excluding the diagonal monomial z_l in
  /// component l.
  std::size_t off_diagonal_term_count() const;
  std::size_t term_count() const;

  CVector evaluate(const CVector& z) const;
  void evaluate_into(const Complex* z, Complex* out) const;

  CMatrix jacobian_at_origin() const;

 private:
  struct Term {
    int component;
    std::size_t monomial;
    Complex coefficient;
  };

  std::vector<Polynomial> components_;
  std::vector<std::optional<double>> tail_l1_;
  int degree_ = 0;
  std::shared_ptr<const MultiIndexBasis> eval_basis_;
  std::vector<Term> terms_;
};

/// Ordered family of subsystems sharing a dimension.
struct SwitchedFamily {
  std::vector<PolyVectorField> subsystems;

  explicit SwitchedFamily(std::vector<PolyVectorField> fields);
  int dimension() const { return subsystems.front().dimension(); }
  std::size_t size() const { return subsystems.size(); }
};

/// Builds a field from (component, exponents, coefficient) triples.
struct Coefficient {
  int component;  // 0-based
  MultiIndex exponents;
  Complex value;
};
PolyVectorField make_field(int n, const std::vector<Coefficient>& coefficients,
                           std::vector<std::optional<double>> tail_l1 = {});

/// Linear field z -> A z.
PolyVectorField linear_field(const CMatrix& A);

/// [F, G](z) = JG(z) F(z) - JF(z) G(z), exact on coefficients.
PolyVectorField lie_bracket(const PolyVectorField& F, const PolyVectorField& G);

/// F_hat(w) = P_inv F(P w). Tail norms are kept only when P is the
/// identity; otherwise they are dropped because the l1 norm of the
/// unstored part cannot be bounded without its degree profile.
PolyVectorField change_coordinates(const PolyVectorField& F, const CMatrix& P,
                                   const CMatrix& P_inv);

/// One classical RK4 step of dz/dt = F(z).
CVector flow_step(const PolyVectorField& F, const CVector& z, double dt);

/// Integrates to time t with fixed steps of at most dt; the last step is
/// shortened to land on t.
CVector flow(const PolyVectorField& F, CVector z, double t, double dt);

struct InvarianceReport {
  bool holds = false;
  double worst_value = 0.0;
  CVector worst_point;
  int worst_face = 0;
  std::size_t evaluations = 0;
  std::size_t samples = 0;
  double margin = 0.0;
};

/// Samples Re(F_l(z) conj(z_l)) on every face |z_l| = rho of the polydisk
/// boundary. Evidence only: a finite sample cannot prove invariance.
InvarianceReport boundary_invariance_check(const PolyVectorField& F, double rho,
                                           int samples, double margin = 0.0);

/// Radical inverse of i in the given prime base, in [0, 1).
double radical_inverse(std::size_t i, int base);
/// i-th point of the Halton sequence in [0,1)^dim (dim <= 16).
std::vector<double> halton_point(std::size_t i, int dim);

}  // namespace kclf

#endif  // KCLF_VECTORFIELD_HPP
