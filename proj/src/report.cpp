#include "kclf/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace kclf {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json complex_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

json matrix_json(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(complex_json(M(r, c)));
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  CMatrix M(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != rows)
      throw std::runtime_error("report: matrix is not square");
    for (Eigen::Index c = 0; c < rows; ++c)
      M(r, c) = {j[r][c].at("re").get<double>(), j[r][c].at("im").get<double>()};
  }
  return M;
}

json location_json(const PairLocation& p, const MultiIndexBasis& basis) {
  if (p.subsystem < 0) return nullptr;
  return json{{"subsystem", p.subsystem + 1},
              {"j", p.j},
              {"k", p.k},
              {"alpha_j", basis[p.j].exponents()},
              {"alpha_k", basis[p.k].exponents()},
              {"value", num(p.value)}};
}

json doubles(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

std::string report_to_json(const CertificateReport& r) {
  json j;
  j["status"] = to_string(r.status);
  j["certified"] = r.certified();
  j["message"] = r.message;
  j["n"] = r.n;
  j["truncation_degree"] = r.truncation_degree;
  j["solvability"] = json{{"solvable", r.solvable},
                          {"algebra_dim", r.algebra_dim},
                          {"derived_dims", r.derived_dims}};
  if (r.triangularization) {
    const auto& t = *r.triangularization;
    json eig = json::array();
    for (const auto& e : t.eigenvalues) {
      json row = json::array();
      for (Eigen::Index i = 0; i < e.size(); ++i) row.push_back(complex_json(e[i]));
      eig.push_back(row);
    }
    j["triangularization"] = json{{"P", matrix_json(t.P)},
                                  {"P_inv", matrix_json(t.P_inv)},
                                  {"eigenvalues", eig},
                                  {"residual", num(t.residual)},
                                  {"condition", num(t.condition)}};
  } else {
    j["triangularization"] = nullptr;
  }

  const MultiIndexBasis basis(std::max(r.n, 1), std::max(r.truncation_degree, 1));
  j["scheme"] = json{{"kind", to_string(r.scheme.kind)},
                     {"xi", num(r.scheme.xi)},
                     {"kappa", num(r.scheme.kappa)},
                     {"xi_min", num(r.xi_min)},
                     {"dominance", r.dominance}};
  j["term_counts"] = r.term_counts;
  j["q"] = json{{"by_degree", doubles(r.q_by_degree)},
                {"sup_computed", num(r.q_sup_computed)},
                {"limsup_extrapolated", num(r.q_limsup_extrapolated)},
                {"unbounded", r.q_unbounded},
                {"argmax", r.n > 0 ? location_json(r.q_argmax, basis) : json(nullptr)}};
  j["eta_used"] = num(r.eta_used);

  json eps = json::array();
  for (Eigen::Index k = 1; k < r.epsilon.size(); ++k)
    eps.push_back(json{{"index", k},
                       {"alpha", basis[static_cast<std::size_t>(k)].exponents()},
                       {"value", num(r.epsilon[k])}});
  j["epsilon"] = eps;
  j["epsilon_strict"] = r.epsilon_strict;
  j["rho_certified"] = num(r.rho_certified);
  const auto& c = r.convergence;
  j["convergence"] = json{{"partial_sum", num(c.partial_sum)},
                          {"tail_bound", num(c.tail_bound)},
                          {"ratio", num(c.ratio)},
                          {"observed_ratio", num(c.observed_ratio)},
                          {"predicted_ratio", num(c.predicted_ratio)},
                          {"top_degree_max", num(c.top_degree_max)},
                          {"convergent", c.convergent}};
  json inv = json::array();
  for (std::size_t i = 0; i < r.invariance.size(); ++i) {
    const auto& v = r.invariance[i];
    inv.push_back(json{{"subsystem", i + 1},
                       {"holds", v.holds},
                       {"worst_value", num(v.worst_value)},
                       {"worst_face", v.worst_face + 1},
                       {"evaluations", v.evaluations},
                       {"samples", v.samples},
                       {"margin", num(v.margin)}});
  }
  j["invariance"] = inv;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

CommonLyapunovFunction clf_from_report_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("report: invalid JSON: ") + e.what());
  }
  try {
    if (!j.at("certified").get<bool>())
      throw std::runtime_error("report: status is " + j.at("status").get<std::string>() +
                               ", not certified");
    const int n = j.at("n").get<int>();
    const int N = j.at("truncation_degree").get<int>();
    CommonLyapunovFunction clf;
    clf.basis = std::make_shared<const MultiIndexBasis>(n, N);
    clf.epsilon = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(clf.basis->size()));
    for (const auto& e : j.at("epsilon")) {
      const auto k = e.at("index").get<std::size_t>();
      if (k == 0 || k >= clf.basis->size())
        throw std::runtime_error("report: epsilon index out of range");
      if (clf.basis->operator[](k).exponents() != e.at("alpha").get<std::vector<int>>())
        throw std::runtime_error("report: epsilon alpha does not match its index");
      clf.epsilon[static_cast<Eigen::Index>(k)] = e.at("value").get<double>();
    }
    const json& t = j.at("triangularization");
    clf.P = matrix_from(t.at("P"));
    clf.P_inv = matrix_from(t.at("P_inv"));
    if (clf.P.rows() != n) throw std::runtime_error("report: P has the wrong size");
    clf.rho = j.at("rho_certified").get<double>();
    clf.tail_ratio = j.at("convergence").at("ratio").get<double>();
    return clf;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report: malformed: ") + e.what());
  }
}

std::string audit_to_json(const AuditSummary& a) {
  json j{{"passed", a.passed},
         {"runs", a.runs},
         {"max_V_increase", num(a.max_V_increase)},
         {"worst_trial", a.worst_trial},
         {"worst_point", a.worst_point},
         {"converged_fraction", num(a.converged_fraction)},
         {"escapes", a.escapes},
         {"nonfinite", a.nonfinite},
         {"rho", num(a.rho)},
         {"sample_radius", num(a.sample_radius)},
         {"scope", a.scope}};
  return j.dump(2) + "\n";
}

std::string epsilon_csv(const Eigen::VectorXd& eps, const MultiIndexBasis& basis) {
  std::string out = "index,alpha,degree,epsilon\n";
  char buf[64];
  for (Eigen::Index k = 1; k < eps.size(); ++k) {
    const MultiIndex& a = basis[static_cast<std::size_t>(k)];
    out += std::to_string(k) + ",";
    for (int l = 0; l < a.dimension(); ++l) out += (l ? " " : "") + std::to_string(a[l]);
    out += "," + std::to_string(a.degree()) + ",";
    auto res = std::to_chars(buf, buf + sizeof(buf), eps[k]);
    out.append(buf, res.ptr);
    out += '\n';
  }
  return out;
}

}  // namespace kclf
