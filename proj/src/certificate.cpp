#include "kclf/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace kclf {

void validate_scheme(const WeightScheme& scheme) {
  if (!(scheme.xi > 0.0 && scheme.xi < 1.0))
    throw std::invalid_argument("weight scheme: xi must lie in (0, 1)");
  if (scheme.kind == SchemeKind::diagonal_dominance) {
    if (!(scheme.kappa > 0.0 && scheme.kappa < 1.0))
      throw std::invalid_argument("weight scheme: kappa must lie in (0, 1)");
    if (!(scheme.xi + scheme.kappa < 1.0))
      throw std::invalid_argument("weight scheme: xi + kappa must be < 1");
  }
}

SubsystemAnalysis::SubsystemAnalysis(PolyVectorField hat_field,
                                     std::shared_ptr<const MultiIndexBasis> basis_ptr)
    : field(std::move(hat_field)), koopman(build_matrix(field, std::move(basis_ptr))) {
  const MultiIndexBasis& b = *koopman.basis;
  const std::size_t M = koopman.size();
  jacobian = field.jacobian_at_origin();
  lambda = diagonal_eigenvalues(koopman, jacobian.diagonal());
  term_count = field.off_diagonal_term_count();
  row_sums.resize(M);
  col_sums.resize(M);
  for (std::size_t j = 1; j <= M; ++j) {
    row_sums[j - 1] = row_abs_sum(field, b, j);
    col_sums[j - 1] = col_abs_sum(field, b, j);
  }
  incoming.assign(M, {});
  for (Eigen::Index r = 0; r < koopman.entries.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(koopman.entries, r); it; ++it)
      if (it.col() > r) incoming[it.col()].push_back(static_cast<std::size_t>(r) + 1);
}

namespace {

bool coupled(const SubsystemAnalysis& sub, std::size_t j, std::size_t k) {
  return sub.koopman(k, j) != Complex(0.0) || sub.koopman(j, k) != Complex(0.0);
}

double equal_degree_count(int n) { return static_cast<double>(n * n - n) / 2.0; }

}  // namespace

double weight(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j,
              std::size_t k) {
  if (j == k)
    return scheme.kind == SchemeKind::polynomial ? 1.0 - scheme.xi
                                                 : 1.0 - scheme.xi - scheme.kappa;
  if (!coupled(sub, j, k)) return 0.0;
  if (scheme.kind == SchemeKind::polynomial)
    return scheme.xi / (2.0 * static_cast<double>(sub.term_count));

  const int dj = sub.basis()[j].degree(), dk = sub.basis()[k].degree();
  if (dj == dk) return scheme.xi / (2.0 * equal_degree_count(sub.basis().dimension()));
  if (dk < dj) return 0.5 * scheme.kappa * std::abs(sub.koopman(k, j)) / sub.row_sums[j - 1];
  return 0.5 * scheme.kappa * std::abs(sub.koopman(j, k)) / sub.col_sums[j - 1];
}

double weight_row_sum(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j) {
  double s = weight(sub, scheme, j, j);
  const Eigen::Index r = static_cast<Eigen::Index>(j - 1);
  std::vector<std::size_t> support(sub.incoming[j - 1]);
  for (SparseRowMatrix::InnerIterator it(sub.koopman.entries, r); it; ++it)
    if (it.col() != r) support.push_back(static_cast<std::size_t>(it.col()) + 1);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (std::size_t k : support) s += weight(sub, scheme, j, k);
  return s;
}

double q_value(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j,
               std::size_t k) {
  if (!(j > k)) throw std::invalid_argument("q_value: requires j > k");
  const double L = std::abs(sub.koopman(k, j));
  if (L == 0.0) return 0.0;
  const double rj = std::abs(sub.lambda[static_cast<Eigen::Index>(j - 1)].real());
  const double rk = std::abs(sub.lambda[static_cast<Eigen::Index>(k - 1)].real());
  if (rj == 0.0 || rk == 0.0)
    throw StructuralError("q_value: diagonal entry with zero real part");
  return L * L / (4.0 * rj * rk * weight(sub, scheme, j, k) * weight(sub, scheme, k, j));
}

LimsupEstimate extrapolate_limsup(const std::vector<double>& by_degree) {
  LimsupEstimate est;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t d = 1; d < by_degree.size(); ++d) {
    est.computed = std::max(est.computed, by_degree[d]);
    if (by_degree[d] > 0.0) pts.emplace_back(static_cast<double>(d), by_degree[d]);
  }
  est.extrapolated = est.computed;
  if (pts.size() > 6) pts.erase(pts.begin(), pts.end() - 6);
  if (pts.size() >= 3) {
    // Least squares for q = L - A x with x = 1/d.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [d, q] : pts) {
      const double x = 1.0 / d;
      sx += x;
      sy += q;
      sxx += x * x;
      sxy += x * q;
    }
    const double m = static_cast<double>(pts.size());
    const double den = m * sxx - sx * sx;
    if (den > 0.0) {
      const double slope = (m * sxy - sx * sy) / den;
      const double L = (sy - slope * sx) / m;
      est.extrapolated = std::max(est.extrapolated, L);
    }
    // Non-shrinking positive increments suggest growth without bound.
    const std::size_t t = pts.size();
    const double d1 = pts[t - 1].second - pts[t - 2].second;
    const double d0 = pts[t - 2].second - pts[t - 3].second;
    est.unbounded = d0 > 0.0 && d1 >= d0 * (1.0 - 1e-9) && d1 > 1e-12 * pts[t - 1].second;
  }
  return est;
}

PolyCondition check_poly_condition(const std::vector<SubsystemAnalysis>& subs) {
  PolyCondition res;
  if (subs.empty()) return res;
  const MultiIndexBasis& b = subs.front().basis();
  res.by_degree.assign(b.max_degree() + 1, 0.0);
  const WeightScheme unit{SchemeKind::polynomial, 0.5, 0.0};
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto& sub = subs[i];
    for (std::size_t j = 1; j <= sub.koopman.size(); ++j) {
      for (std::size_t k : sub.incoming[j - 1]) {
        const double v = q_value(sub, unit, j, k) * unit.xi * unit.xi;
        const int d = b[j].degree();
        res.by_degree[d] = std::max(res.by_degree[d], v);
        if (v > res.argmax.value) res.argmax = {static_cast<int>(i), j, k, v};
      }
    }
  }
  res.estimate = extrapolate_limsup(res.by_degree);
  res.pass = !res.estimate.unbounded && res.estimate.extrapolated < 1.0;
  return res;
}

double dd_xi_min(const std::vector<SubsystemAnalysis>& subs) {
  double xi = 0.0;
  for (const auto& sub : subs) {
    const CMatrix& J = sub.jacobian;
    const Eigen::Index n = J.rows();
    const double D = equal_degree_count(static_cast<int>(n));
    for (Eigen::Index q = 0; q < n; ++q) {
      for (Eigen::Index r = q + 1; r < n; ++r) {
        const double a = std::abs(J(q, r));
        if (a == 0.0) continue;
        const double rq = std::abs(J(q, q).real()), rr = std::abs(J(r, r).real());
        xi = std::max(xi, D * a * std::max(1.0 / std::sqrt(rq * rr), 1.0 / rq));
      }
    }
  }
  return xi;
}

DdCondition check_dd_condition(const std::vector<SubsystemAnalysis>& subs, double xi,
                               double kappa, double rho) {
  DdCondition res;
  if (subs.empty()) return res;
  res.dominance = xi > dd_xi_min(subs);
  const MultiIndexBasis& b = subs.front().basis();
  res.by_degree.assign(b.max_degree() + 1, 0.0);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto& sub = subs[i];
    for (std::size_t j = 1; j <= sub.koopman.size(); ++j) {
      const int d = b[j].degree();
      const double rj = std::abs(sub.lambda[static_cast<Eigen::Index>(j - 1)].real());
      for (std::size_t k : sub.incoming[j - 1]) {
        if (b[k].degree() == d) continue;
        const double rk = std::abs(sub.lambda[static_cast<Eigen::Index>(k - 1)].real());
        const double v =
            sub.row_sums[j - 1] * sub.col_sums[k - 1] / (kappa * kappa * rj * rk);
        res.by_degree[d] = std::max(res.by_degree[d], v);
        if (v > res.argmax.value) res.argmax = {static_cast<int>(i), j, k, v};
      }
    }
  }
  res.estimate = extrapolate_limsup(res.by_degree);
  res.pass = res.dominance && !res.estimate.unbounded &&
             res.estimate.extrapolated * rho * rho < 1.0;
  return res;
}

Eigen::VectorXd epsilon_sequence(const std::vector<SubsystemAnalysis>& subs,
                                 const WeightScheme& scheme, double eta, double delta_floor) {
  if (subs.empty()) throw std::invalid_argument("epsilon_sequence: no subsystems");
  if (!(eta > 0.0)) throw std::invalid_argument("epsilon_sequence: eta must be positive");
  const MultiIndexBasis& b = subs.front().basis();
  const std::size_t M = b.size() - 1;
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M + 1));
  if (M == 0) return eps;
  eps[1] = 1.0;
  double running_max = 1.0;
  for (std::size_t j = 2; j <= M; ++j) {
    double m = 0.0;
    for (const auto& sub : subs)
      for (std::size_t k : sub.incoming[j - 1])
        m = std::max(m, eps[static_cast<Eigen::Index>(k)] * q_value(sub, scheme, j, k));
    // Geometric floor keeps uncoupled monomials positive without adding a
    // non-summable constant tail.
    const double floor = delta_floor * running_max * std::ldexp(1.0, -b[j].degree());
    const double e = std::max((1.0 + eta) * m, floor);
    eps[static_cast<Eigen::Index>(j)] = e;
    running_max = std::max(running_max, e);
  }
  return eps;
}

bool epsilon_strict(const Eigen::VectorXd& eps, const std::vector<SubsystemAnalysis>& subs,
                    const WeightScheme& scheme) {
  for (Eigen::Index j = 1; j < eps.size(); ++j)
    if (!(eps[j] > 0.0)) return false;
  for (const auto& sub : subs)
    for (std::size_t j = 1; j <= sub.koopman.size(); ++j)
      for (std::size_t k : sub.incoming[j - 1])
        if (!(eps[static_cast<Eigen::Index>(j)] >
              eps[static_cast<Eigen::Index>(k)] * q_value(sub, scheme, j, k)))
          return false;
  return true;
}

std::vector<double> epsilon_degree_maxima(const Eigen::VectorXd& eps,
                                          const MultiIndexBasis& basis) {
  std::vector<double> E(basis.max_degree() + 1, 0.0);
  for (std::size_t k = 1; k < basis.size() && static_cast<Eigen::Index>(k) < eps.size(); ++k)
    E[basis[k].degree()] = std::max(E[basis[k].degree()], eps[static_cast<Eigen::Index>(k)]);
  return E;
}

namespace {

double binomial(int a, int b) {
  double c = 1.0;
  for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
  return c;
}

// sum_{d > N} C(d+n-1, n-1) * w(d) * E_N * r^(d-N) * s^(2d)
double tail_series(int n, int N, double E_N, double r, double s, bool weight_by_degree) {
  if (E_N == 0.0 || s == 0.0) return 0.0;
  if (r * s * s >= 1.0) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double geo = E_N * std::pow(s, 2.0 * N);
  for (int d = N + 1; d < N + 200000; ++d) {
    geo *= r * s * s;
    const double term = binomial(d + n - 1, n - 1) * (weight_by_degree ? d : 1) * geo;
    sum += term;
    if (term <= 1e-17 * sum && d > N + 10) break;
  }
  return sum;
}

// Sliding maximum over the last `window` degrees, so sequences whose
// couplings skip degrees (parity patterns) become comparable step to step.
std::vector<double> envelope(const std::vector<double>& E, int window) {
  std::vector<double> out(E.size(), 0.0);
  for (std::size_t d = 1; d < E.size(); ++d)
    for (int s = 0; s < window && static_cast<int>(d) - s >= 1; ++s)
      out[d] = std::max(out[d], E[d - s]);
  return out;
}

// Last few maxima carried forward to degree N with growth ratio r.
double tail_anchor(const std::vector<double>& E, double r) {
  const int N = static_cast<int>(E.size()) - 1;
  double a = 0.0;
  for (int s = 0; s < 4 && N - s >= 1; ++s) a = std::max(a, E[N - s] * std::pow(r, s));
  return a;
}

}  // namespace

double observed_growth(const std::vector<double>& E) {
  constexpr int kWindow = 4;
  constexpr int kPeriod = 12;  // lcm(1..kWindow)
  const int N = static_cast<int>(E.size()) - 1;
  const std::vector<double> env = envelope(E, kWindow);
  if (N <= 1 || env[N] == 0.0) return 0.0;
  int w = (N - kWindow) / kPeriod * kPeriod;
  if (w == 0) w = N - kWindow;  // short run: longest span available
  if (w > 0 && env[N - w] > 0.0) return std::pow(env[N] / env[N - w], 1.0 / w);
  double r = 0.0;
  for (int d = std::max(2, N - 2); d <= N; ++d)
    if (env[d - 1] > 0.0) r = std::max(r, env[d] / env[d - 1]);
  return r;
}

std::vector<GapLimsup> coupling_limsups(const std::vector<SubsystemAnalysis>& subs,
                                        const WeightScheme& scheme) {
  std::map<int, std::vector<double>> by_gap;
  if (subs.empty()) return {};
  const MultiIndexBasis& b = subs.front().basis();
  for (const auto& sub : subs) {
    for (std::size_t j = 1; j <= sub.koopman.size(); ++j) {
      const int dj = b[j].degree();
      for (std::size_t k : sub.incoming[j - 1]) {
        const int gap = dj - b[k].degree();
        if (gap == 0) continue;
        auto& seq = by_gap[gap];
        seq.resize(b.max_degree() + 1, 0.0);
        seq[dj] = std::max(seq[dj], q_value(sub, scheme, j, k));
      }
    }
  }
  std::vector<GapLimsup> out;
  for (const auto& [gap, seq] : by_gap) {
    const LimsupEstimate est = extrapolate_limsup(seq);
    out.push_back({gap, est.unbounded ? std::numeric_limits<double>::infinity()
                                      : est.extrapolated});
  }
  return out;
}

double predicted_growth(const std::vector<GapLimsup>& limsups, double eta) {
  double r = 0.0;
  for (const auto& g : limsups)
    r = std::max(r, std::pow((1.0 + eta) * g.q_limsup, 1.0 / g.gap));
  return r;
}

ConvergenceResult convergence_check(const Eigen::VectorXd& eps, const MultiIndexBasis& basis,
                                    double rho, double asymptotic_ratio) {
  ConvergenceResult res;
  for (std::size_t k = 1; k < basis.size(); ++k) {
    const int d = basis[k].degree();
    res.partial_sum += d * eps[static_cast<Eigen::Index>(k)] * std::pow(rho, 2.0 * d);
  }
  const std::vector<double> E = epsilon_degree_maxima(eps, basis);
  res.observed_ratio = observed_growth(E);
  res.predicted_ratio = asymptotic_ratio;
  res.ratio = std::max(res.observed_ratio, asymptotic_ratio);
  res.top_degree_max = tail_anchor(E, res.ratio);
  res.tail_bound = tail_series(basis.dimension(), basis.max_degree(), res.top_degree_max,
                               res.ratio, rho, true);
  res.convergent = std::isfinite(res.tail_bound);
  return res;
}

ClfValue clf_evaluate(const Eigen::VectorXd& eps, const CMatrix& P_inv,
                      const MultiIndexBasis& basis, const CVector& z, double asymptotic_ratio) {
  const CVector w = P_inv * z;
  const double s = w.cwiseAbs().maxCoeff();
  if (!(s < 1.0)) throw std::domain_error("clf_evaluate: point outside the unit polydisk");
  std::vector<Complex> mono;
  evaluate_monomials(basis, w, mono);
  ClfValue v;
  for (std::size_t k = 1; k < basis.size(); ++k)
    v.value += eps[static_cast<Eigen::Index>(k)] * std::norm(mono[k]);
  const std::vector<double> E = epsilon_degree_maxima(eps, basis);
  const double r = std::max(observed_growth(E), asymptotic_ratio);
  v.tail = tail_series(basis.dimension(), basis.max_degree(), tail_anchor(E, r), r, s, false);
  return v;
}

ClfValue CommonLyapunovFunction::evaluate(const CVector& z) const {
  return clf_evaluate(epsilon, P_inv, *basis, z, tail_ratio);
}

double CommonLyapunovFunction::value_hat(const Complex* w, std::vector<Complex>& scratch) const {
  const MultiIndexBasis& b = *basis;
  scratch.resize(b.size());
  scratch[0] = Complex(1.0);
  double v = 0.0;
  for (std::size_t k = 1; k < b.size(); ++k) {
    scratch[k] = scratch[b.parent(k)] * w[b.parent_slot(k)];
    v += epsilon[static_cast<Eigen::Index>(k)] * std::norm(scratch[k]);
  }
  return v;
}

std::string to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::certified: return "certified";
    case CertificateStatus::unsolvable: return "unsolvable";
    case CertificateStatus::not_hurwitz: return "not_hurwitz";
    case CertificateStatus::scheme_failed: return "scheme_failed";
    case CertificateStatus::divergent: return "divergent";
  }
  return "unknown";
}

std::string to_string(SchemeKind k) {
  return k == SchemeKind::polynomial ? "poly" : "dd";
}

CommonLyapunovFunction CertificateReport::clf() const {
  if (!certified()) throw std::logic_error("clf: report is not certified");
  CommonLyapunovFunction f;
  f.basis = std::make_shared<const MultiIndexBasis>(n, truncation_degree);
  f.epsilon = epsilon;
  f.P = triangularization->P;
  f.P_inv = triangularization->P_inv;
  f.rho = rho_certified;
  f.tail_ratio = convergence.ratio;
  return f;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Largest rho in (0, 1] for which pred holds, by bisection; 0 if none.
template <typename Pred>
double bisect_rho(Pred pred, int iterations) {
  if (pred(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

CertificateReport certify(const SwitchedFamily& family, const CertifyOptions& options) {
  if (options.truncation_degree < 1)
    throw std::invalid_argument("certify: truncation degree must be >= 1");
  if (options.rho_request && !(*options.rho_request > 0.0 && *options.rho_request <= 1.0))
    throw std::invalid_argument("certify: requested rho must lie in (0, 1]");

  CertificateReport rep;
  rep.n = family.dimension();
  rep.truncation_degree = options.truncation_degree;
  rep.scheme.kind = options.scheme;

  // Jacobian algebra.
  std::vector<CMatrix> jac;
  for (const auto& F : family.subsystems) jac.push_back(F.jacobian_at_origin());
  const MatrixLieAlgebra g = close_under_bracket(jac, options.lie_tol);
  const SolvabilityResult sol = is_solvable(g, options.lie_tol);
  rep.solvable = sol.solvable;
  rep.algebra_dim = g.dim;
  rep.derived_dims = sol.derived_dims;

  std::optional<TriangularizationResult> tri;
  std::string tri_error;
  try {
    tri = simultaneous_triangularize(jac, options.lie_tol);
  } catch (const NotSimultaneouslyTriangularizable& e) {
    tri_error = e.what();
  }
  if (!sol.solvable) {
    rep.status = CertificateStatus::unsolvable;
    rep.message = "Jacobian Lie algebra is not solvable (derived series stalls); no common "
                  "invariant maximal flag";
    if (tri)
      rep.warnings.push_back("triangularization succeeded although the solvability test "
                             "failed; both verdicts are tolerance dependent");
    return rep;
  }
  if (!tri) {
    rep.status = CertificateStatus::unsolvable;
    rep.message = "solvability test passed but no simultaneous triangular form was found: " +
                  tri_error;
    return rep;
  }
  rep.triangularization = tri;
  if (tri->condition > 1e8)
    rep.warnings.push_back("change of basis is ill-conditioned (cond " + fmt(tri->condition) +
                           ")");
  if (!diagonals_hurwitz(*tri)) {
    rep.status = CertificateStatus::not_hurwitz;
    rep.message = "a Jacobian eigenvalue has non-negative real part; the origin is not a "
                  "hyperbolic stable equilibrium of every subsystem";
    return rep;
  }

  // Hat coordinates and Koopman data.
  auto basis = std::make_shared<const MultiIndexBasis>(rep.n, options.truncation_degree);
  std::vector<SubsystemAnalysis> subs;
  bool tails_dropped = false;
  for (const auto& F : family.subsystems) {
    PolyVectorField hat = change_coordinates(F, tri->P, tri->P_inv);
    tails_dropped = tails_dropped || (F.has_any_tail() && !hat.has_any_tail());
    subs.emplace_back(std::move(hat), basis);
    if (!verify_triangular(subs.back().koopman, 0.0))
      throw StructuralError("Koopman matrix is not upper triangular in the flag coordinates");
    rep.term_counts.push_back(subs.back().term_count);
  }
  if (tails_dropped)
    rep.warnings.push_back("tail norms dropped by the change of coordinates; column sums use "
                           "stored coefficients only");

  // Scheme condition.
  WeightScheme& scheme = rep.scheme;
  if (options.scheme == SchemeKind::polynomial) {
    scheme.xi = options.xi.value_or(0.99);
    validate_scheme(scheme);
    const PolyCondition pc = check_poly_condition(subs);
    rep.q_by_degree = pc.by_degree;
    rep.q_sup_computed = pc.estimate.computed;
    rep.q_limsup_extrapolated = pc.estimate.extrapolated;
    rep.q_unbounded = pc.estimate.unbounded;
    rep.q_argmax = pc.argmax;
    if (!pc.pass) {
      rep.status = CertificateStatus::scheme_failed;
      rep.message = pc.estimate.unbounded
                        ? "Q sequence appears unbounded over the truncation"
                        : "polynomial-scheme condition K^2|L_jk|^2/(|Re l_j||Re l_k|) < 1 "
                          "fails: limsup estimate " +
                              fmt(pc.estimate.extrapolated);
      return rep;
    }
  } else {
    rep.xi_min = dd_xi_min(subs);
    scheme.xi = options.xi.value_or(rep.xi_min > 0.0 ? 1.01 * rep.xi_min : 1e-6);
    scheme.kappa = options.kappa.value_or(0.98 * (1.0 - scheme.xi));
    if (!(scheme.xi < 1.0) || !(scheme.xi + scheme.kappa < 1.0)) {
      rep.status = CertificateStatus::scheme_failed;
      rep.message = "diagonal-dominance inequalities on the triangular Jacobians need xi >= " +
                    fmt(rep.xi_min) + ", leaving no admissible kappa";
      return rep;
    }
    validate_scheme(scheme);
    const DdCondition dc = check_dd_condition(subs, scheme.xi, scheme.kappa, 0.0);
    rep.dominance = dc.dominance;
    rep.q_by_degree = dc.by_degree;
    rep.q_sup_computed = dc.estimate.computed;
    rep.q_limsup_extrapolated = dc.estimate.extrapolated;
    rep.q_unbounded = dc.estimate.unbounded;
    rep.q_argmax = dc.argmax;
    if (!dc.dominance || dc.estimate.unbounded) {
      rep.status = CertificateStatus::scheme_failed;
      rep.message = !dc.dominance
                        ? "Jacobian diagonal-dominance inequalities fail for xi = " +
                              fmt(scheme.xi)
                        : "cross-degree ratio sequence appears unbounded over the truncation";
      return rep;
    }
  }

  // Radius allowed by the scheme condition alone.
  auto scheme_ok = [&](double rho) {
    if (scheme.kind == SchemeKind::polynomial) return true;
    return check_dd_condition(subs, scheme.xi, scheme.kappa, rho).pass;
  };
  double rho_scheme = options.rho_request.value_or(1.0);
  if (!scheme_ok(rho_scheme)) {
    if (options.rho_request) {
      rep.status = CertificateStatus::scheme_failed;
      rep.message = "cross-degree ratio limsup " + fmt(rep.q_limsup_extrapolated) +
                    " is not below 1/rho^2 at the requested radius";
      return rep;
    }
    rho_scheme = bisect_rho(scheme_ok, options.bisection_iterations);
  }

  // Epsilon recursion; the headroom eta is halved until the series
  // converges at the scheme radius.
  const std::vector<GapLimsup> limsups = coupling_limsups(subs, scheme);
  double eta = options.eta;
  Eigen::VectorXd eps;
  auto check_at = [&](double rho) {
    return convergence_check(eps, *basis, rho, predicted_growth(limsups, eta));
  };
  while (true) {
    eps = epsilon_sequence(subs, scheme, eta, options.delta_floor);
    if (check_at(rho_scheme).convergent || eta / 2.0 < options.eta_min) break;
    eta /= 2.0;
  }
  rep.eta_used = eta;
  rep.epsilon = eps;
  rep.epsilon_strict = epsilon_strict(eps, subs, scheme);
  if (!rep.epsilon_strict)
    rep.warnings.push_back("epsilon recursion lost strictness to rounding");

  double rho = rho_scheme;
  if (!check_at(rho).convergent) {
    if (options.rho_request) {
      rep.status = CertificateStatus::divergent;
      rep.message = "epsilon series diverges at the requested radius";
      rep.convergence = check_at(rho);
      return rep;
    }
    rho = bisect_rho([&](double r) { return r <= rho_scheme && check_at(r).convergent; },
                     options.bisection_iterations);
    if (rho <= 0.0) {
      rep.status = CertificateStatus::divergent;
      rep.message = "no radius makes the epsilon series converge";
      return rep;
    }
    rep.warnings.push_back("epsilon series diverges at the scheme radius " + fmt(rho_scheme) +
                           "; radius reduced");
  }
  rep.rho_certified = rho;
  rep.convergence = check_at(rho);
  if (!rep.convergence.convergent) {
    rep.status = CertificateStatus::divergent;
    rep.message = "epsilon series diverges";
    return rep;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    rep.invariance.push_back(
        boundary_invariance_check(subs[i].field, rho, options.invariance_samples, 0.0));
    if (!rep.invariance.back().holds)
      rep.warnings.push_back("sampled boundary test found an outward point for subsystem " +
                             std::to_string(i + 1) + " at rho = " + fmt(rho));
  }
  rep.status = CertificateStatus::certified;
  rep.message = "GUAS certified on the polydisk of radius " + fmt(rho) +
                " in flag coordinates (truncated evidence)";
  return rep;
}

}  // namespace kclf
