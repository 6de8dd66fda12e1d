#include "kclf/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kclf/builtin.hpp"
#include "kclf/config.hpp"
#include "kclf/report.hpp"
#include "kclf/switchsim.hpp"

namespace kclf {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

int status_code(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::certified: return exit_code::ok;
    case CertificateStatus::unsolvable: return exit_code::unsolvable;
    case CertificateStatus::not_hurwitz:
    case CertificateStatus::scheme_failed: return exit_code::scheme_failed;
    case CertificateStatus::divergent: return exit_code::divergent;
  }
  return exit_code::scheme_failed;
}

// Flags shared by analyze and simulate that override the config.
struct CertifyFlags {
  std::optional<int> degree;
  std::optional<std::string> scheme;
  std::optional<double> xi, kappa, rho;

  void add(CLI::App* app) {
    app->add_option("--degree", degree, "truncation degree N")->check(CLI::PositiveNumber);
    app->add_option("--scheme", scheme, "weight scheme")->check(CLI::IsMember({"poly", "dd"}));
    app->add_option("--xi", xi, "scheme parameter xi in (0,1)");
    app->add_option("--kappa", kappa, "diagonal-dominance kappa in (0,1)");
    app->add_option("--rho", rho, "requested radius in (0,1]");
  }

  void apply(SystemConfig& cfg) const {
    if (degree) cfg.truncation_degree = *degree;
    if (scheme) cfg.scheme.kind = *scheme == "dd" ? SchemeKind::diagonal_dominance
                                                  : SchemeKind::polynomial;
    if (xi) cfg.scheme.xi = *xi;
    if (kappa) cfg.scheme.kappa = *kappa;
    if (rho) {
      if (!(*rho > 0.0 && *rho <= 1.0)) throw UsageError("--rho must lie in (0, 1]");
      cfg.rho_request = *rho;
    }
  }
};

CertificateReport run_certify(const SystemConfig& cfg) {
  try {
    return certify(build_family(cfg), certify_options(cfg));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void summarize(const CertificateReport& r, std::ostream& err) {
  err << to_string(r.status) << ": " << r.message << "\n";
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Koopman-matrix common Lyapunov functions for switched nonlinear systems"};
  app.require_subcommand(1);
  int code = exit_code::ok;

  // analyze
  std::string config_path, out_path, format = "json";
  CertifyFlags cflags;
  auto* analyze = app.add_subcommand("analyze", "certify a switched family from a config");
  analyze->add_option("--config", config_path, "system config (JSON)")->required();
  analyze->add_option("--out", out_path, "report destination (default stdout)");
  analyze->add_option("--format", format, "json report or csv epsilon table")
      ->check(CLI::IsMember({"json", "csv"}));
  cflags.add(analyze);

  // simulate
  std::string report_path, trace_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, points;
  std::optional<double> dt;
  auto* simulate = app.add_subcommand("simulate", "audit a certificate on random switching");
  simulate->add_option("--config", config_path, "system config (JSON)")->required();
  simulate->add_option("--report", report_path, "certificate report from analyze");
  simulate->add_option("--out", out_path, "summary destination (default stdout)");
  simulate->add_option("--format", format, "json summary or csv trace of the worst run")
      ->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--trace", trace_path, "also write the worst run as CSV");
  simulate->add_option("--seed", seed, "audit seed");
  simulate->add_option("--trials", trials, "number of switching signals")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--points", points, "initial points per signal")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--dt", dt, "RK4 step")->check(CLI::PositiveNumber);
  cflags.add(simulate);

  // figure-rho
  double mu_min = 2.4, mu_max = 12.0;
  int steps = 100, fig_degree = 20;
  bool with_pipeline = false;
  auto* figure = app.add_subcommand("figure-rho", "radius curve of the second example");
  figure->add_option("--mu-min", mu_min, "smallest mu (>= 12/5)");
  figure->add_option("--mu-max", mu_max, "largest mu");
  figure->add_option("--steps", steps, "number of rows")->check(CLI::PositiveNumber);
  figure->add_option("--out", out_path, "CSV destination (default stdout)");
  figure->add_flag("--certify", with_pipeline, "add the pipeline-certified radius column");
  figure->add_option("--degree", fig_degree, "truncation degree for --certify")
      ->check(CLI::PositiveNumber);

  // selftest
  std::string fault;
  auto* selftest = app.add_subcommand("selftest", "property self-test");
  selftest->add_option("--inject-fault", fault, "mutation fixture")
      ->check(CLI::IsMember({"entry-sign"}));

  // built-in examples
  double a = 1.0, b = 0.3, mu = 3.0;
  int ex_degree = 0;
  auto* ex1 = app.add_subcommand("example1", "config of the first example");
  ex1->add_option("--a", a, "diagonal rate a > 0");
  ex1->add_option("--b", b, "coupling b");
  ex1->add_option("--degree", ex_degree, "truncation degree (default 12)")
      ->check(CLI::PositiveNumber);
  ex1->add_option("--out", out_path, "config destination (default stdout)");
  auto* ex2 = app.add_subcommand("example2", "config of the second example");
  ex2->add_option("--mu", mu, "parameter mu > 0");
  ex2->add_option("--degree", ex_degree, "Taylor and truncation degree (default 20)")
      ->check(CLI::PositiveNumber);
  ex2->add_option("--out", out_path, "config destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  }

  try {
    if (*analyze) {
      SystemConfig cfg = load_config(config_path);
      cflags.apply(cfg);
      const CertificateReport r = run_certify(cfg);
      summarize(r, err);
      if (format == "csv") {
        const MultiIndexBasis basis(cfg.n, cfg.truncation_degree);
        emit(epsilon_csv(r.epsilon, basis), out_path, out);
      } else {
        emit(report_to_json(r), out_path, out);
      }
      code = status_code(r.status);
    } else if (*simulate) {
      SystemConfig cfg = load_config(config_path);
      cflags.apply(cfg);
      CommonLyapunovFunction clf;
      if (!report_path.empty()) {
        try {
          clf = clf_from_report_json(read_file(report_path));
        } catch (const std::runtime_error& e) {
          throw ConfigError(e.what());
        }
        if (clf.basis->dimension() != cfg.n) throw ConfigError("report and config disagree on n");
      } else {
        const CertificateReport r = run_certify(cfg);
        if (!r.certified()) {
          summarize(r, err);
          err << "no certificate to audit\n";
          return status_code(r.status);
        }
        clf = r.clf();
      }
      const SwitchedFamily family = build_family(cfg);
      AuditOptions ao;
      const SimulationConfig& sim = cfg.simulation;
      ao.trials = trials.value_or(sim.trials);
      ao.initial_points = points.value_or(sim.initial_points);
      ao.seed = seed.value_or(sim.seed);
      ao.dt = dt.value_or(sim.dt);
      ao.horizon = sim.horizon;
      ao.min_dwell = sim.min_dwell;
      ao.max_dwell = sim.max_dwell;
      const AuditSummary s = audit_certificate(clf, family, ao);
      err << (s.passed ? "audit passed" : "audit FAILED") << ": max relative V increase "
          << shortest(s.max_V_increase) << ", escapes " << s.escapes << ", converged "
          << shortest(s.converged_fraction) << "\n";
      std::string trace;
      if (format == "csv" || !trace_path.empty()) {
        const int t = std::max(s.worst_trial, 0), p = std::max(s.worst_point, 0);
        const SwitchingSignal sig = random_signal(
            static_cast<int>(family.size()), ao.horizon, ao.min_dwell, ao.max_dwell,
            audit_signal_seed(ao.seed, t));
        const auto starts =
            audit_initial_points(cfg.n, ao.initial_points, s.sample_radius, ao.seed);
        IntegrateOptions io;
        io.dt = ao.dt;
        io.clf = &clf;
        trace = trace_csv(integrate_switched(family, sig, clf.P * starts[p], io));
      }
      if (!trace_path.empty()) emit(trace, trace_path, out);
      emit(format == "csv" ? trace : audit_to_json(s), out_path, out);
      code = s.passed ? exit_code::ok : exit_code::audit_failed;
    } else if (*figure) {
      if (!(mu_min >= 2.4))
        throw UsageError("--mu-min must be >= 12/5: the radius formula for this example is "
                         "only established for mu >= 12/5");
      if (!(mu_max >= mu_min)) throw UsageError("--mu-max must be >= --mu-min");
      std::string csv = with_pipeline ? "mu,rho_closed_form,rho_certified\n"
                                      : "mu,rho_closed_form\n";
      for (int i = 0; i < steps; ++i) {
        const double m =
            steps == 1 ? mu_min
                       : (mu_min * (steps - 1 - i) + mu_max * i) / static_cast<double>(steps - 1);
        csv += shortest(m) + "," + shortest(example2_closed_form_rho(m));
        if (with_pipeline) {
          CertifyOptions o;
          o.truncation_degree = fig_degree;
          o.scheme = SchemeKind::diagonal_dominance;
          const CertificateReport r = certify(example2_family(m, fig_degree), o);
          csv += "," + (r.certified() ? shortest(r.rho_certified) : std::string());
        }
        csv += "\n";
      }
      emit(csv, out_path, out);
    } else if (*selftest) {
      code = run_selftest(fault == "entry-sign", out);
    } else if (*ex1) {
      if (!(a > 0.0)) throw UsageError("--a must be positive");
      const SystemConfig cfg = config_from_family(example1_family(a, b),
                                                  ex_degree ? ex_degree : 12,
                                                  SchemeKind::polynomial);
      emit(config_to_json(cfg), out_path, out);
    } else if (*ex2) {
      if (!(mu > 0.0)) throw UsageError("--mu must be positive");
      const int N = ex_degree ? ex_degree : 20;
      const SystemConfig cfg =
          config_from_family(example2_family(mu, N), N, SchemeKind::diagonal_dominance);
      emit(config_to_json(cfg), out_path, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const ConfigError& e) {
    err << "input error: " << e.what() << "\n";
    return exit_code::bad_input;
  }
  return code;
}

}  // namespace kclf
