#include "kclf/switchsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <thread>

namespace kclf {

std::vector<double> SwitchingSignal::boundaries() const {
  std::vector<double> b{0.0};
  double t = 0.0;
  for (const auto& s : segments) {
    t += s.duration;
    b.push_back(t);
  }
  if (!segments.empty()) b.back() = horizon;
  return b;
}

double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SwitchingSignal random_signal(int m, double horizon, double min_dwell, double max_dwell,
                              std::uint64_t seed) {
  if (m <= 0) throw std::invalid_argument("random_signal: need at least one subsystem");
  if (!(min_dwell > 0.0))
    throw std::invalid_argument("random_signal: min_dwell must be positive");
  if (!(max_dwell >= min_dwell))
    throw std::invalid_argument("random_signal: max_dwell must be >= min_dwell");
  if (!(horizon >= 0.0)) throw std::invalid_argument("random_signal: negative horizon");

  std::mt19937_64 rng(seed);
  SwitchingSignal sig;
  sig.horizon = horizon;
  double t = 0.0;
  while (t < horizon) {
    double dwell = min_dwell + (max_dwell - min_dwell) * unit_uniform(rng());
    const int sub = std::min(m - 1, static_cast<int>(unit_uniform(rng()) * m));
    if (t + dwell >= horizon) dwell = horizon - t;
    sig.segments.push_back({dwell, sub});
    t += dwell;
  }
  return sig;
}

namespace {

struct Stepper {
  explicit Stepper(int n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}

  // One RK4 step in place.
  void step(const PolyVectorField& F, std::vector<Complex>& z, double h) {
    const std::size_t n = z.size();
    F.evaluate_into(z.data(), k1.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    F.evaluate_into(tmp.data(), k2.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    F.evaluate_into(tmp.data(), k3.data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    F.evaluate_into(tmp.data(), k4.data());
    for (std::size_t i = 0; i < n; ++i)
      z[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  std::vector<Complex> k1, k2, k3, k4, tmp;
};

double inf_norm(const std::vector<Complex>& z) {
  double m = 0.0;
  for (const auto& c : z) m = std::max(m, std::abs(c));
  return m;
}

bool all_finite(const std::vector<Complex>& z) {
  return std::all_of(z.begin(), z.end(), [](Complex c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

}  // namespace

SwitchedRun integrate_switched(const SwitchedFamily& family, const SwitchingSignal& signal,
                               const CVector& z0, const IntegrateOptions& options) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("integrate_switched: dt must be positive");
  const int n = family.dimension();
  if (z0.size() != n) throw std::invalid_argument("integrate_switched: dimension mismatch");
  for (const auto& s : signal.segments)
    if (s.subsystem < 0 || s.subsystem >= static_cast<int>(family.size()))
      throw std::invalid_argument("integrate_switched: subsystem index out of range");

  SwitchedRun run;
  run.signal = signal;
  const CommonLyapunovFunction* clf = options.clf;
  const bool identity =
      clf == nullptr || (clf->P_inv - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;

  std::vector<Complex> z(z0.data(), z0.data() + n), w(n), scratch;
  Stepper stepper(n);
  double V_prev = 0.0;
  bool have_prev = false;

  // Flag coordinates, V, escape test; false stops the run.
  auto observe = [&](double t, int active) {
    if (!all_finite(z)) {
      run.nonfinite = true;
      return false;
    }
    if (identity) {
      w = z;
    } else {
      for (int r = 0; r < n; ++r) {
        Complex s(0.0);
        for (int c = 0; c < n; ++c) s += clf->P_inv(r, c) * z[c];
        w[r] = s;
      }
    }
    if (inf_norm(w) >= 1.0 - 1e-12) run.escaped = true;
    double V = 0.0;
    if (clf) {
      V = clf->value_hat(w.data(), scratch);
      if (have_prev && V_prev > 0.0)
        run.max_V_increase = std::max(run.max_V_increase, (V - V_prev) / V_prev);
      run.max_V = std::max(run.max_V, V);
      V_prev = V;
      have_prev = true;
    }
    if (options.record) {
      run.times.push_back(t);
      run.states.emplace_back(Eigen::Map<const CVector>(z.data(), n));
      if (clf) run.V_values.push_back(V);
      run.active.push_back(active);
    }
    return !run.escaped;
  };

  const int first = signal.segments.empty() ? 0 : signal.segments.front().subsystem;
  bool alive = observe(0.0, first);
  const std::vector<double> bounds = signal.boundaries();
  for (std::size_t s = 0; s < signal.segments.size() && alive; ++s) {
    const PolyVectorField& F = family.subsystems[signal.segments[s].subsystem];
    const double t0 = bounds[s], t1 = bounds[s + 1];
    const double dur = t1 - t0;
    const auto full = static_cast<long long>(std::floor(dur / options.dt * (1.0 + 1e-12)));
    for (long long i = 1; i <= full && alive; ++i) {
      stepper.step(F, z, options.dt);
      const double t = (i == full && dur - full * options.dt <= 1e-12 * options.dt)
                           ? t1
                           : t0 + static_cast<double>(i) * options.dt;
      alive = observe(t, signal.segments[s].subsystem);
    }
    const double rem = dur - static_cast<double>(full) * options.dt;
    if (alive && rem > 1e-12 * options.dt) {
      stepper.step(F, z, rem);
      alive = observe(t1, signal.segments[s].subsystem);
    }
  }
  run.final_norm = inf_norm(z);
  return run;
}

std::vector<CVector> audit_initial_points(int n, int count, double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<CVector> pts;
  for (int i = 0; i < count; ++i) {
    const std::vector<double> h = halton_point(static_cast<std::size_t>(i / 2), n);
    CVector w(n);
    for (int l = 0; l < n; ++l) {
      if (i % 2 == 0) {
        w[l] = r * (2.0 * h[l] - 1.0);
      } else {
        const double phase = 2.0 * std::numbers::pi * unit_uniform(rng());
        w[l] = std::polar(r * std::sqrt(h[l]), phase);
      }
    }
    pts.push_back(std::move(w));
  }
  return pts;
}

int worker_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("KOOPMAN_CLF_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t audit_signal_seed(std::uint64_t seed, int trial) {
  return splitmix(seed + static_cast<std::uint64_t>(trial));
}

namespace {

struct TrialResult {
  double max_increase = -std::numeric_limits<double>::infinity();
  int worst_point = -1;
  std::size_t converged = 0, escapes = 0, nonfinite = 0;
};

}  // namespace

AuditSummary audit_certificate(const CommonLyapunovFunction& clf, const SwitchedFamily& family,
                               const AuditOptions& options) {
  if (options.trials <= 0) throw std::invalid_argument("audit: trials must be positive");
  if (options.initial_points <= 0)
    throw std::invalid_argument("audit: initial_points must be positive");
  const int n = family.dimension();
  AuditSummary sum;
  sum.rho = clf.rho;
  sum.sample_radius = 0.95 * clf.rho;
  sum.scope = "evidence on " + std::to_string(options.trials * options.initial_points) +
              " sampled runs from the polydisk of radius 0.95*rho in flag coordinates; not a "
              "proof of GUAS outside the certified polydisk";

  const std::vector<CVector> starts =
      audit_initial_points(n, options.initial_points, sum.sample_radius, options.seed);
  std::vector<CVector> z0s;
  for (const auto& w : starts) z0s.push_back(clf.P * w);

  std::vector<TrialResult> results(options.trials);
  auto run_trial = [&](int t) {
    const SwitchingSignal sig =
        random_signal(static_cast<int>(family.size()), options.horizon, options.min_dwell,
                      options.max_dwell, audit_signal_seed(options.seed, t));
    IntegrateOptions io;
    io.dt = options.dt;
    io.clf = &clf;
    io.record = false;
    TrialResult& r = results[t];
    for (int p = 0; p < static_cast<int>(z0s.size()); ++p) {
      const SwitchedRun run = integrate_switched(family, sig, z0s[p], io);
      if (run.max_V_increase > r.max_increase) {
        r.max_increase = run.max_V_increase;
        r.worst_point = p;
      }
      r.escapes += run.escaped;
      r.nonfinite += run.nonfinite;
      r.converged += !run.escaped && !run.nonfinite && run.final_norm < options.converge_norm;
    }
  };

  const int threads = std::max(1, std::min(options.threads > 0 ? options.threads : worker_threads(),
                                           options.trials));
  if (threads == 1) {
    for (int t = 0; t < options.trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int t = w; t < options.trials; t += threads) run_trial(t);
      });
    for (auto& th : pool) th.join();
  }

  std::size_t converged = 0;
  for (int t = 0; t < options.trials; ++t) {
    const TrialResult& r = results[t];
    if (r.max_increase > sum.max_V_increase) {
      sum.max_V_increase = r.max_increase;
      sum.worst_trial = t;
      sum.worst_point = r.worst_point;
    }
    converged += r.converged;
    sum.escapes += r.escapes;
    sum.nonfinite += r.nonfinite;
  }
  sum.runs = static_cast<std::size_t>(options.trials) * z0s.size();
  sum.converged_fraction = static_cast<double>(converged) / static_cast<double>(sum.runs);
  sum.passed = sum.max_V_increase <= options.slack && sum.escapes == 0 && sum.nonfinite == 0;
  return sum;
}

namespace {

void put(std::string& out, double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

}  // namespace

std::string trace_csv(const SwitchedRun& run) {
  std::string out = "t";
  const int n = run.states.empty() ? 0 : static_cast<int>(run.states.front().size());
  for (int l = 1; l <= n; ++l)
    out += ",re_z" + std::to_string(l) + ",im_z" + std::to_string(l);
  out += ",V,active_subsystem\n";
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    put(out, run.times[i]);
    for (int l = 0; l < n; ++l) {
      out += ',';
      put(out, run.states[i][l].real());
      out += ',';
      put(out, run.states[i][l].imag());
    }
    out += ',';
    if (i < run.V_values.size()) put(out, run.V_values[i]);
    out += ',' + std::to_string(run.active[i] + 1) + '\n';
  }
  return out;
}

}  // namespace kclf
