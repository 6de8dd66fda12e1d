#ifndef KCLF_CERTIFICATE_HPP
#define KCLF_CERTIFICATE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kclf/koopman.hpp"
#include "kclf/liealg.hpp"
#include "kclf/vectorfield.hpp"

namespace kclf {

enum class SchemeKind { polynomial, diagonal_dominance };

/// Resolved b-weight scheme.
struct WeightScheme {
  SchemeKind kind = SchemeKind::polynomial;
  double xi = 0.99;
  double kappa = 0.0;  // diagonal dominance only
};

/// Throws std::invalid_argument when the parameters leave (0,1).
void validate_scheme(const WeightScheme& scheme);

/// Per-subsystem data in triangularized coordinates.
struct SubsystemAnalysis {
  explicit SubsystemAnalysis(PolyVectorField hat_field,
                             std::shared_ptr<const MultiIndexBasis> basis);

  PolyVectorField field;
  KoopmanMatrix koopman;
  CMatrix jacobian;
  CVector lambda;                // lambda(j-1) for basis index j
  std::vector<double> row_sums;  // row_sums[j-1]
  std::vector<double> col_sums;  // col_sums[k-1]
  std::size_t term_count = 0;    // K: nonzero terms off the diagonal z_l in F_l
  /// incoming[j-1]: basis indices k < j with <L e_k, e_j> != 0.
  std::vector<std::vector<std::size_t>> incoming;

  const MultiIndexBasis& basis() const { return *koopman.basis; }
};

/// b_jk for basis indices j, k >= 1.
double weight(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j,
              std::size_t k);

/// Sum over k of b_jk across the support of row and column j.
double weight_row_sum(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j);

/// |<L e_k, e_j>|^2 / (4 |Re lambda_j| |Re lambda_k| b_jk b_kj) for j > k,
/// zero when uncoupled. Throws StructuralError on a zero real part.
double q_value(const SubsystemAnalysis& sub, const WeightScheme& scheme, std::size_t j,
               std::size_t k);

struct PairLocation {
  int subsystem = -1;
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0.0;
};

/// Limsup estimate from per-degree maxima q_d by fitting q_d = L - A/d.
struct LimsupEstimate {
  double computed = 0.0;      // max over all degrees
  double extrapolated = 0.0;  // max(L_fit, computed)
  bool unbounded = false;
};

LimsupEstimate extrapolate_limsup(const std::vector<double>& by_degree);

struct PolyCondition {
  /// xi-free quantity K^2 |L|^2 / (|Re lambda_j| |Re lambda_k|).
  std::vector<double> by_degree;  // indexed by |alpha(j)|
  LimsupEstimate estimate;
  PairLocation argmax;
  bool pass = false;
};

PolyCondition check_poly_condition(const std::vector<SubsystemAnalysis>& subs);

/// Smallest xi allowed by the Jacobian dominance inequalities (0 when the
/// triangular Jacobians are diagonal or n = 1).
double dd_xi_min(const std::vector<SubsystemAnalysis>& subs);

struct DdCondition {
  bool dominance = false;
  /// Cross-degree row*col / (kappa^2 |Re lambda_j| |Re lambda_k|).
  std::vector<double> by_degree;
  LimsupEstimate estimate;
  PairLocation argmax;
  bool pass = false;
};

DdCondition check_dd_condition(const std::vector<SubsystemAnalysis>& subs, double xi,
                               double kappa, double rho);

/// epsilon indexed by basis index (entry 0 unused and zero).
Eigen::VectorXd epsilon_sequence(const std::vector<SubsystemAnalysis>& subs,
                                 const WeightScheme& scheme, double eta,
                                 double delta_floor = 1e-12);

/// eps_j > eps_k Q_jk for every coupled pair, strictly.
bool epsilon_strict(const Eigen::VectorXd& eps, const std::vector<SubsystemAnalysis>& subs,
                    const WeightScheme& scheme);

struct ConvergenceResult {
  double partial_sum = 0.0;
  double tail_bound = 0.0;
  /// Per-degree growth of eps used for the tail: max(observed, predicted).
  double ratio = 0.0;
  double observed_ratio = 0.0;
  double predicted_ratio = 0.0;
  double top_degree_max = 0.0;
  bool convergent = false;
};

/// Per-degree maxima of eps (index = degree, entry 0 unused).
std::vector<double> epsilon_degree_maxima(const Eigen::VectorXd& eps,
                                          const MultiIndexBasis& basis);

/// Growth per degree of the sliding-max envelope of per-degree maxima,
/// averaged over a window that is a multiple of every short period.
double observed_growth(const std::vector<double>& degree_maxima);

/// Extrapolated limsup of Q over coupled pairs whose degrees differ by gap.
struct GapLimsup {
  int gap = 0;
  double q_limsup = 0.0;
};
std::vector<GapLimsup> coupling_limsups(const std::vector<SubsystemAnalysis>& subs,
                                        const WeightScheme& scheme);

/// Asymptotic per-degree growth of eps: max over gaps g of
/// ((1 + eta) Q_g)^(1/g).
double predicted_growth(const std::vector<GapLimsup>& limsups, double eta);

/// Partial sum of sum |alpha(k)| eps_k rho^(2|alpha(k)|) plus a geometric
/// tail bound with ratio max(observed, asymptotic_ratio).
ConvergenceResult convergence_check(const Eigen::VectorXd& eps, const MultiIndexBasis& basis,
                                    double rho, double asymptotic_ratio = 0.0);

struct ClfValue {
  double value = 0.0;
  double tail = 0.0;
};

/// V(z) = sum_k eps_k |(P_inv z)^alpha(k)|^2 plus a tail estimate.
/// Throws std::domain_error outside the unit polydisk in hat coordinates.
ClfValue clf_evaluate(const Eigen::VectorXd& eps, const CMatrix& P_inv,
                      const MultiIndexBasis& basis, const CVector& z,
                      double asymptotic_ratio = 0.0);

/// Certified function ready for repeated evaluation.
struct CommonLyapunovFunction {
  std::shared_ptr<const MultiIndexBasis> basis;
  Eigen::VectorXd epsilon;
  CMatrix P;
  CMatrix P_inv;
  double rho = 0.0;
  double tail_ratio = 0.0;

  ClfValue evaluate(const CVector& z) const;
  /// Truncated value at hat coordinates w; no domain checks.
  double value_hat(const Complex* w, std::vector<Complex>& scratch) const;
};

enum class CertificateStatus { certified, unsolvable, not_hurwitz, scheme_failed, divergent };

std::string to_string(CertificateStatus s);
std::string to_string(SchemeKind k);

struct CertifyOptions {
  int truncation_degree = 12;
  SchemeKind scheme = SchemeKind::polynomial;
  std::optional<double> xi;
  std::optional<double> kappa;
  std::optional<double> rho_request;
  double eta = 0.5;
  double eta_min = 1e-3;
  double delta_floor = 1e-12;
  double lie_tol = 1e-10;
  int invariance_samples = 4;
  int bisection_iterations = 40;
};

struct CertificateReport {
  CertificateStatus status = CertificateStatus::unsolvable;
  std::string message;
  int n = 0;
  int truncation_degree = 0;

  bool solvable = false;
  int algebra_dim = 0;
  std::vector<int> derived_dims;
  std::optional<TriangularizationResult> triangularization;

  WeightScheme scheme;
  std::vector<std::size_t> term_counts;
  double xi_min = 0.0;
  bool dominance = false;
  std::vector<double> q_by_degree;
  double q_sup_computed = 0.0;
  double q_limsup_extrapolated = 0.0;
  bool q_unbounded = false;
  PairLocation q_argmax;

  double eta_used = 0.0;
  Eigen::VectorXd epsilon;
  bool epsilon_strict = false;
  double rho_certified = 0.0;
  ConvergenceResult convergence;
  std::vector<InvarianceReport> invariance;
  std::vector<std::string> warnings;

  bool certified() const { return status == CertificateStatus::certified; }
  /// Only meaningful when certified.
  CommonLyapunovFunction clf() const;
};

CertificateReport certify(const SwitchedFamily& family, const CertifyOptions& options);

}  // namespace kclf

#endif  // KCLF_CERTIFICATE_HPP
