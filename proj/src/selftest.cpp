#include <algorithm>
#include <random>
#include <string>

#include "kclf/cli.hpp"
#include "kclf/koopman.hpp"
#include "kclf/switchsim.hpp"
#include "kclf/vectorfield.hpp"

namespace kclf {

namespace {

struct Rng {
  explicit Rng(std::uint64_t seed) : g(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_uniform(g()); }
  Complex complex() { return {uniform(-1, 1), uniform(-1, 1)}; }
  int below(int m) { return std::min(m - 1, static_cast<int>(unit_uniform(g()) * m)); }
  std::mt19937_64 g;
};

// Random field of the given max degree without constant terms; when
// upper is set the linear part is upper triangular.
PolyVectorField random_field(Rng& rng, int n, int degree, bool upper) {
  std::vector<Coefficient> cs;
  const MultiIndexBasis b(n, degree);
  for (int l = 0; l < n; ++l)
    for (std::size_t k = 1; k < b.size(); ++k) {
      const MultiIndex& a = b[k];
      if (a.degree() == 1) {
        int m = 0;
        while (a[m] == 0) ++m;
        if (upper && m < l) continue;
      } else if (rng.uniform(0, 1) < 0.4) {
        continue;
      }
      cs.push_back({l, a, rng.complex()});
    }
  return make_field(n, cs);
}

// Independent route: L_F z^alpha = sum_l F_l d/dz_l z^alpha as polynomials.
Complex symbolic_entry(const PolyVectorField& F, const MultiIndexBasis& b, std::size_t k,
                       std::size_t j) {
  const int n = F.dimension();
  Polynomial mono(n);
  mono.add_term(b[k], 1.0);
  Polynomial acc(n);
  for (int l = 0; l < n; ++l) acc += F.component(l) * mono.derivative(l);
  return acc.coefficient(b[j]);
}

bool lex_suite(std::ostream& out) {
  int checked = 0;
  for (int n = 1; n <= 3; ++n)
    for (int N = 0; N <= 5; ++N) {
      std::vector<std::vector<int>> all;
      std::vector<int> v(n, 0);
      // Odometer over [0, N]^n.
      while (true) {
        int s = 0;
        for (int x : v) s += x;
        if (s <= N) all.push_back(v);
        int p = 0;
        while (p < n && ++v[p] > N) v[p++] = 0;
        if (p == n) break;
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& c) {
        int da = 0, dc = 0;
        for (int x : a) da += x;
        for (int x : c) dc += x;
        if (da != dc) return da < dc;
        return a > c;
      });
      const MultiIndexBasis b(n, N);
      if (b.size() != all.size()) {
        out << "FAIL lex-order: size " << b.size() << " vs " << all.size() << " at n=" << n
            << " N=" << N << "\n";
        return false;
      }
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (b[k].exponents() != all[k] || b.index_of(b[k]) != k ||
            (k > 0 && !graded_lex_less(b[k - 1], b[k]))) {
          out << "FAIL lex-order: index " << k << " at n=" << n << " N=" << N << "\n";
          return false;
        }
      }
      ++checked;
    }
  out << "PASS lex-order (" << checked << " bases, n <= 3, N <= 5)\n";
  return true;
}

bool entry_suite(const KoopmanBuildOptions& opts, std::ostream& out) {
  Rng rng(11);
  const int N = 5;
  int checked = 0;
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 3;
    const PolyVectorField F = random_field(rng, n, 3, false);
    const MultiIndexBasis b(n, N);
    for (std::size_t k = 1; k < b.size(); ++k)
      for (std::size_t j = 1; j < b.size(); ++j) {
        const Complex want = symbolic_entry(F, b, k, j);
        if (std::abs(entry(F, b, k, j, opts) - want) > 1e-12 * (1.0 + std::abs(want))) {
          out << "FAIL koopman-entry: trial " << t << " (k, j) = (" << k << ", " << j << ")\n";
          return false;
        }
        ++checked;
      }
  }
  out << "PASS koopman-entry (" << checked << " entries vs symbolic derivative)\n";
  return true;
}

bool bracket_suite(const KoopmanBuildOptions& opts, std::ostream& out) {
  Rng rng(7);
  const int n = 2, N = 7;
  auto basis = std::make_shared<const MultiIndexBasis>(n, N);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const PolyVectorField F = random_field(rng, n, 2, false);
    const PolyVectorField G = random_field(rng, n, 2, false);
    const PolyVectorField B = lie_bracket(F, G);
    const KoopmanMatrix KF = build_matrix(F, basis, opts), KG = build_matrix(G, basis, opts),
                        KB = build_matrix(B, basis, opts);
    const CMatrix C = KG.dense() * KF.dense() - KF.dense() * KG.dense();
    const CMatrix D = KB.dense();
    const int exact = std::min({KF.exact_degree, KG.exact_degree, KB.exact_degree});
    for (std::size_t k = 1; k < basis->size() && (*basis)[k].degree() <= exact; ++k)
      for (std::size_t j = 1; j < basis->size(); ++j)
        worst = std::max(worst, std::abs(C(k - 1, j - 1) - D(k - 1, j - 1)));
  }
  if (!(worst <= 1e-10)) {
    out << "FAIL bracket-identity: max deviation " << worst << "\n";
    return false;
  }
  out << "PASS bracket-identity (20 pairs, n = 2, N = 7)\n";
  return true;
}

bool triangular_suite(const KoopmanBuildOptions& opts, std::ostream& out) {
  Rng rng(3);
  const int n = 3, N = 5;
  auto basis = std::make_shared<const MultiIndexBasis>(n, N);
  for (int t = 0; t < 10; ++t) {
    const PolyVectorField F = random_field(rng, n, 3, true);
    const KoopmanMatrix K = build_matrix(F, basis, opts);
    if (!verify_triangular(K, 0.0)) {
      out << "FAIL triangularity: field " << t << " has a sub-diagonal entry\n";
      return false;
    }
    const CMatrix J = F.jacobian_at_origin();
    try {
      diagonal_eigenvalues(K, J.diagonal());
    } catch (const StructuralError& e) {
      out << "FAIL triangularity: " << e.what() << "\n";
      return false;
    }
  }
  for (int t = 0; t < 5; ++t) {
    std::vector<Coefficient> cs{{0, MultiIndex{1, 0, 0}, -1.0},
                                {1, MultiIndex{1, 0, 0}, rng.complex() + 2.0},
                                {1, MultiIndex{0, 1, 0}, -1.0},
                                {2, MultiIndex{0, 0, 1}, -1.0}};
    if (verify_triangular(build_matrix(make_field(n, cs), basis, opts), 0.0)) {
      out << "FAIL triangularity: lower coupling left the matrix triangular\n";
      return false;
    }
  }
  out << "PASS triangularity (10 upper-triangular fields, 5 lower-coupled controls)\n";
  return true;
}

}  // namespace

int run_selftest(bool inject_entry_sign, std::ostream& out) {
  KoopmanBuildOptions opts;
  opts.mutate_entry_sign = inject_entry_sign;
  if (inject_entry_sign) out << "fault injected: entry-sign\n";
  bool ok = lex_suite(out);
  ok = entry_suite(opts, out) && ok;
  ok = bracket_suite(opts, out) && ok;
  ok = triangular_suite(opts, out) && ok;
  out << (ok ? "selftest: PASS\n" : "selftest: FAIL\n");
  return ok ? exit_code::ok : exit_code::property_failure;
}

}  // namespace kclf
