#ifndef KCLF_REPORT_HPP
#define KCLF_REPORT_HPP

#include <string>

#include "kclf/certificate.hpp"
#include "kclf/switchsim.hpp"

namespace kclf {

/// Deterministic JSON (no timestamps, shortest round-trip numbers,
/// non-finite values as null).
std::string report_to_json(const CertificateReport& report);

/// Rebuilds the certified function from report JSON; throws
/// std::runtime_error when the report is not a certificate.
CommonLyapunovFunction clf_from_report_json(const std::string& text);

std::string audit_to_json(const AuditSummary& audit);

/// index, alpha, degree, epsilon.
std::string epsilon_csv(const Eigen::VectorXd& eps, const MultiIndexBasis& basis);

}  // namespace kclf

#endif  // KCLF_REPORT_HPP
