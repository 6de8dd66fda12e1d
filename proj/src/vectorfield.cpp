#include "kclf/vectorfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kclf {

// ---------------------------------------------------------------------------
// Polynomial

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.degree());
  return d;
}

Complex Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? Complex(0.0) : it->second;
}

void Polynomial::add_term(const MultiIndex& alpha, Complex c) {
  if (alpha.dimension() != n_)
    throw std::invalid_argument("Polynomial: exponent dimension mismatch");
  if (c == Complex(0.0)) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex(0.0)) terms_.erase(it);
  }
}

Polynomial Polynomial::derivative(int m) const {
  Polynomial out(n_);
  for (const auto& [alpha, c] : terms_) {
    if (alpha[m] == 0) continue;
    std::vector<int> e(alpha.exponents());
    --e[m];
    out.add_term(MultiIndex(std::move(e)), c * static_cast<double>(alpha[m]));
  }
  return out;
}

Complex Polynomial::evaluate(const CVector& z) const {
  Complex sum(0.0);
  for (const auto& [alpha, c] : terms_) {
    Complex mono(1.0);
    for (int l = 0; l < n_; ++l)
      for (int p = 0; p < alpha[l]; ++p) mono *= z[l];
    sum += c * mono;
  }
  return sum;
}

void Polynomial::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(Complex s) {
  if (s == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("Polynomial: dimension mismatch");
  Polynomial out(a.dimension());
  for (const auto& [alpha, ca] : a.terms())
    for (const auto& [beta, cb] : b.terms()) out.add_term(alpha + beta, ca * cb);
  return out;
}

// ---------------------------------------------------------------------------
// PolyVectorField

PolyVectorField::PolyVectorField(std::vector<Polynomial> components,
                                 std::vector<std::optional<double>> tail_l1)
    : components_(std::move(components)), tail_l1_(std::move(tail_l1)) {
  if (components_.empty())
    throw std::invalid_argument("PolyVectorField: no components");
  const int n = dimension();
  if (tail_l1_.empty()) tail_l1_.assign(n, std::nullopt);
  if (static_cast<int>(tail_l1_.size()) != n)
    throw std::invalid_argument("PolyVectorField: tail_l1 size mismatch");

  for (int l = 0; l < n; ++l) {
    const Polynomial& p = components_[l];
    if (p.dimension() != n)
      throw std::invalid_argument("PolyVectorField: component dimension mismatch");
    for (const auto& [alpha, c] : p.terms()) {
      if (alpha.degree() == 0)
        throw std::invalid_argument(
            "PolyVectorField: constant term present; the field must vanish at 0");
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw std::invalid_argument("PolyVectorField: non-finite coefficient");
    }
    degree_ = std::max(degree_, p.degree());
    if (tail_l1_[l]) {
      const double stored = stored_l1(l);
      if (!(*tail_l1_[l] >= stored * (1.0 - 1e-12)))
        throw std::invalid_argument(
            "PolyVectorField: tail_l1 smaller than the stored coefficient sum");
    }
  }

  eval_basis_ = std::make_shared<const MultiIndexBasis>(n, std::max(degree_, 1));
  for (int l = 0; l < n; ++l)
    for (const auto& [alpha, c] : components_[l].terms())
      terms_.push_back({l, *eval_basis_->index_of(alpha), c});
}

bool PolyVectorField::has_any_tail() const {
  return std::any_of(tail_l1_.begin(), tail_l1_.end(),
                     [](const auto& t) { return t.has_value(); });
}

double PolyVectorField::stored_l1(int l) const {
  double s = 0.0;
  for (const auto& [alpha, c] : components_[l].terms()) s += std::abs(c);
  return s;
}

double PolyVectorField::l1_norm(int l) const {
  return tail_l1_[l] ? *tail_l1_[l] : stored_l1(l);
}

std::size_t PolyVectorField::off_diagonal_term_count() const {
  std::size_t count = 0;
  const int n = dimension();
  for (int l = 0; l < n; ++l) {
    const MultiIndex diag = MultiIndex::unit(n, l);
    for (const auto& [alpha, c] : components_[l].terms())
      if (!(alpha == diag)) ++count;
  }
  return count;
}

std::size_t PolyVectorField::term_count() const {
  std::size_t count = 0;
  for (const auto& p : components_) count += p.terms().size();
  return count;
}

void PolyVectorField::evaluate_into(const Complex* z, Complex* out) const {
  thread_local std::vector<Complex> mono;
  const MultiIndexBasis& basis = *eval_basis_;
  mono.resize(basis.size());
  mono[0] = Complex(1.0);
  for (std::size_t k = 1; k < basis.size(); ++k)
    mono[k] = mono[basis.parent(k)] * z[basis.parent_slot(k)];
  const int n = dimension();
  for (int l = 0; l < n; ++l) out[l] = Complex(0.0);
  for (const Term& t : terms_) out[t.component] += t.coefficient * mono[t.monomial];
}

CVector PolyVectorField::evaluate(const CVector& z) const {
  if (z.size() != dimension())
    throw std::invalid_argument("evaluate: dimension mismatch");
  CVector out(dimension());
  evaluate_into(z.data(), out.data());
  return out;
}

CMatrix PolyVectorField::jacobian_at_origin() const {
  const int n = dimension();
  CMatrix J = CMatrix::Zero(n, n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) J(l, j) = components_[l].coefficient(MultiIndex::unit(n, j));
  return J;
}

SwitchedFamily::SwitchedFamily(std::vector<PolyVectorField> fields)
    : subsystems(std::move(fields)) {
  if (subsystems.empty()) throw std::invalid_argument("SwitchedFamily: empty family");
  for (const auto& f : subsystems)
    if (f.dimension() != subsystems.front().dimension())
      throw std::invalid_argument("SwitchedFamily: dimension mismatch");
}

PolyVectorField make_field(int n, const std::vector<Coefficient>& coefficients,
                           std::vector<std::optional<double>> tail_l1) {
  std::vector<Polynomial> comps(n, Polynomial(n));
  for (const auto& c : coefficients) {
    if (c.component < 0 || c.component >= n)
      throw std::invalid_argument("make_field: component out of range");
    comps[c.component].add_term(c.exponents, c.value);
  }
  return PolyVectorField(std::move(comps), std::move(tail_l1));
}

PolyVectorField linear_field(const CMatrix& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Coefficient> coeffs;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      if (A(l, j) != Complex(0.0)) coeffs.push_back({l, MultiIndex::unit(n, j), A(l, j)});
  return make_field(n, coeffs);
}

PolyVectorField lie_bracket(const PolyVectorField& F, const PolyVectorField& G) {
  const int n = F.dimension();
  if (G.dimension() != n) throw std::invalid_argument("lie_bracket: dimension mismatch");
  std::vector<Polynomial> out(n, Polynomial(n));
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      out[l] += G.component(l).derivative(m) * F.component(m);
      out[l] -= F.component(l).derivative(m) * G.component(m);
    }
  }
  return PolyVectorField(std::move(out));
}

PolyVectorField change_coordinates(const PolyVectorField& F, const CMatrix& P,
                                   const CMatrix& P_inv) {
  const int n = F.dimension();
  const bool identity = (P - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0 &&
                        (P_inv - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;
  if (identity) return F;

  // z_m = sum_r P(m, r) w_r as linear polynomials in w, with cached powers.
  std::vector<std::vector<Polynomial>> powers(n);
  for (int m = 0; m < n; ++m) {
    Polynomial lin(n);
    for (int r = 0; r < n; ++r) lin.add_term(MultiIndex::unit(n, r), P(m, r));
    Polynomial one(n);
    one.add_term(MultiIndex::zero(n), 1.0);
    powers[m].push_back(one);
    for (int p = 1; p <= F.degree(); ++p) powers[m].push_back(powers[m].back() * lin);
  }

  double scale = 0.0;
  std::vector<Polynomial> substituted(n, Polynomial(n));
  for (int l = 0; l < n; ++l) {
    for (const auto& [beta, c] : F.component(l).terms()) {
      Polynomial term(n);
      term.add_term(MultiIndex::zero(n), c);
      for (int m = 0; m < n; ++m)
        if (beta[m] > 0) term = term * powers[m][beta[m]];
      substituted[l] += term;
      scale = std::max(scale, std::abs(c));
    }
  }

  std::vector<Polynomial> out(n, Polynomial(n));
  for (int l = 0; l < n; ++l)
    for (int r = 0; r < n; ++r)
      if (P_inv(l, r) != Complex(0.0)) out[l] += substituted[r] * P_inv(l, r);

  // Roundoff leaves spurious couplings that would count as structure.
  const double tol = 1e-13 * std::max(scale, 1.0) * std::max(1.0, P.cwiseAbs().maxCoeff()) *
                     std::max(1.0, P_inv.cwiseAbs().maxCoeff());
  for (auto& p : out) p.prune(tol);
  return PolyVectorField(std::move(out));
}

CVector flow_step(const PolyVectorField& F, const CVector& z, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be positive");
  const CVector k1 = F.evaluate(z);
  const CVector k2 = F.evaluate(z + (0.5 * dt) * k1);
  const CVector k3 = F.evaluate(z + (0.5 * dt) * k2);
  const CVector k4 = F.evaluate(z + dt * k3);
  CVector next = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFiniteState("flow_step: non-finite state");
  return next;
}

CVector flow(const PolyVectorField& F, CVector z, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow: dt must be positive");
  if (t < 0.0) throw std::invalid_argument("flow: negative time");
  const auto steps = static_cast<long long>(std::ceil(t / dt - 1e-9));
  if (steps == 0) return z;
  const double h = t / static_cast<double>(steps);
  for (long long s = 0; s < steps; ++s) z = flow_step(F, z, h);
  return z;
}

// ---------------------------------------------------------------------------
// Boundary sampling

double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<double> halton_point(std::size_t i, int dim) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim > 16) throw std::invalid_argument("halton_point: dimension > 16");
  std::vector<double> p(dim);
  for (int d = 0; d < dim; ++d) p[d] = radical_inverse(i + 1, primes[d]);
  return p;
}

InvarianceReport boundary_invariance_check(const PolyVectorField& F, double rho,
                                           int samples, double margin) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("boundary_invariance_check: rho must lie in (0, 1]");
  if (samples <= 0)
    throw std::invalid_argument("boundary_invariance_check: samples must be positive");
  if (margin < 0.0)
    throw std::invalid_argument("boundary_invariance_check: negative margin");

  const int n = F.dimension();
  const int phases = 64 * samples;
  InvarianceReport rep;
  rep.worst_value = -std::numeric_limits<double>::infinity();
  rep.samples = static_cast<std::size_t>(samples);
  rep.margin = margin;

  CVector z(n), fz(n);
  auto probe = [&](int face) {
    F.evaluate_into(z.data(), fz.data());
    const double v = (fz[face] * std::conj(z[face])).real();
    ++rep.evaluations;
    if (v > rep.worst_value) {
      rep.worst_value = v;
      rep.worst_point = z;
      rep.worst_face = face;
    }
  };

  for (int face = 0; face < n; ++face) {
    for (int s = 0; s < samples; ++s) {
      // Other coordinates: Halton fill of the closed disk of radius rho,
      // plus the same phases pushed out to the rim |z_j| = rho.
      const std::vector<double> h = halton_point(static_cast<std::size_t>(s), 2 * std::max(n - 1, 1));
      for (int rim = 0; rim < 2; ++rim) {
        int slot = 0;
        for (int j = 0; j < n; ++j) {
          if (j == face) continue;
          const double r = rim ? rho : rho * std::sqrt(h[2 * slot]);
          const double th = 2.0 * std::numbers::pi * h[2 * slot + 1];
          z[j] = std::polar(r, th);
          ++slot;
        }
        for (int p = 0; p < phases; ++p) {
          z[face] = std::polar(rho, 2.0 * std::numbers::pi * p / phases);
          probe(face);
        }
        if (n == 1) break;
      }
    }
  }
  rep.holds = rep.worst_value < -margin;
  return rep;
}

}  // namespace kclf
