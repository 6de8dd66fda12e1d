#ifndef KCLF_SWITCHSIM_HPP
#define KCLF_SWITCHSIM_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kclf/certificate.hpp"
#include "kclf/vectorfield.hpp"

namespace kclf {

struct Segment {
  double duration = 0.0;
  int subsystem = 0;  // 0-based
};

struct SwitchingSignal {
  std::vector<Segment> segments;
  double horizon = 0.0;

  /// Start times of every segment followed by the horizon.
  std::vector<double> boundaries() const;
};

/// Uniform subsystem choice and uniform dwell in [min_dwell, max_dwell];
/// the last segment is cut to land on the horizon.
SwitchingSignal random_signal(int m, double horizon, double min_dwell, double max_dwell,
                              std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits, identical on every
/// platform (std::uniform_real_distribution is not).
double unit_uniform(std::uint64_t bits);

struct SwitchedRun {
  SwitchingSignal signal;
  std::vector<double> times;
  std::vector<CVector> states;
  std::vector<double> V_values;
  std::vector<int> active;  // subsystem driving the step that ended at times[i]
  /// max over steps of (V(t+h) - V(t)) / V(t); negative when V always drops.
  double max_V_increase = -std::numeric_limits<double>::infinity();
  double max_V = 0.0;
  double final_norm = 0.0;
  bool escaped = false;
  bool nonfinite = false;
};

struct IntegrateOptions {
  double dt = 1e-3;
  /// When set, V is tracked and escapes are judged in flag coordinates.
  const CommonLyapunovFunction* clf = nullptr;
  /// Keep the full trace (times, states, V); off for bulk audits.
  bool record = true;
};

/// Piecewise RK4; every segment ends exactly on its boundary.
SwitchedRun integrate_switched(const SwitchedFamily& family, const SwitchingSignal& signal,
                               const CVector& z0, const IntegrateOptions& options);

struct AuditOptions {
  int trials = 100;
  int initial_points = 50;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double horizon = 20.0;
  double min_dwell = 0.1;
  double max_dwell = 1.0;
  double slack = 1e-9;
  double converge_norm = 1e-3;
  /// 0: use KOOPMAN_CLF_THREADS or the hardware count.
  int threads = 0;
};

struct AuditSummary {
  std::size_t runs = 0;
  double max_V_increase = -std::numeric_limits<double>::infinity();
  int worst_trial = -1;
  int worst_point = -1;
  double converged_fraction = 0.0;
  std::size_t escapes = 0;
  std::size_t nonfinite = 0;
  double rho = 0.0;
  double sample_radius = 0.0;
  bool passed = false;
  std::string scope;
};

/// Deterministic initial points in the closed polydisk of radius r (flag
/// coordinates): even indices on the real section, odd indices complex.
std::vector<CVector> audit_initial_points(int n, int count, double r, std::uint64_t seed);

/// Seed of the switching signal used for audit trial t.
std::uint64_t audit_signal_seed(std::uint64_t seed, int trial);

AuditSummary audit_certificate(const CommonLyapunovFunction& clf, const SwitchedFamily& family,
                               const AuditOptions& options);

/// Worker count from KOOPMAN_CLF_THREADS, bounded by the hardware count.
int worker_threads();

/// CSV trace: t, Re z1, Im z1, ..., V, active_subsystem (1-based).
std::string trace_csv(const SwitchedRun& run);

}  // namespace kclf

#endif  // KCLF_SWITCHSIM_HPP
