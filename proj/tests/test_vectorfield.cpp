#include <gtest/gtest.h>

#include <cmath>

#include "kclf/builtin.hpp"
#include "kclf/vectorfield.hpp"
#include "oracles.hpp"
#include "support.hpp"

using kclf::CMatrix;
using kclf::Complex;
using kclf::CVector;
using kclf::MultiIndex;
using kclf::PolyVectorField;

namespace {

CVector vec(std::initializer_list<Complex> v) {
  CVector z(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Complex c : v) z[i++] = c;
  return z;
}

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix M(2, 2);
  M << a, b, c, d;
  return M;
}

// F1 = -alpha x, F2 = -beta x + gamma (x1^2 - x2^2, 2 x1 x2).
PolyVectorField ex31(double alpha, double beta, double gamma, int which) {
  std::vector<kclf::Coefficient> cs;
  if (which == 1) {
    cs = {{0, MultiIndex{1, 0}, -alpha}, {1, MultiIndex{0, 1}, -alpha}};
  } else if (which == 2) {
    cs = {{0, MultiIndex{1, 0}, -beta},  {0, MultiIndex{2, 0}, gamma},
          {0, MultiIndex{0, 2}, -gamma}, {1, MultiIndex{0, 1}, -beta},
          {1, MultiIndex{1, 1}, 2 * gamma}};
  } else {
    cs = {{0, MultiIndex{2, 0}, alpha * gamma},
          {0, MultiIndex{0, 2}, -alpha * gamma},
          {1, MultiIndex{1, 1}, 2 * alpha * gamma}};
  }
  return kclf::make_field(2, cs);
}

}  // namespace

TEST(Field, EvaluateLinearDiagonal) {
  const auto F = kclf::linear_field(mat2(-1, 0, 0, -1));
  const CVector v = F.evaluate(vec({0.5, Complex(0, 0.5)}));
  EXPECT_NEAR(std::abs(v[0] - Complex(-0.5)), 0, 1e-15);
  EXPECT_NEAR(std::abs(v[1] - Complex(0, -0.5)), 0, 1e-15);
}

TEST(Field, EvaluateExampleOneSecondSubsystem) {
  const auto fam = kclf::example1_family(1.0, 0.25);
  const CVector v = fam.subsystems[1].evaluate(vec({0.2, 0.1}));
  // -0.2 + 0.25 (0.04 - 0.002), -0.1 + 0.125 * 0.02
  EXPECT_NEAR(std::abs(v[0] - Complex(-0.1905)), 0, 1e-15);
  EXPECT_NEAR(std::abs(v[1] - Complex(-0.0975)), 0, 1e-15);
  EXPECT_EQ(fam.subsystems[1].off_diagonal_term_count(), 3u);
}

TEST(Field, EvaluateMatchesOracleAndVanishesAtOrigin) {
  oracle::Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 3;
    const auto Fo = oracle::random_field(rng, n, 4, false);
    const auto F = support::to_field(Fo);
    CVector z(n);
    for (int i = 0; i < n; ++i) z[i] = 0.8 * rng.complex();
    const CVector v = F.evaluate(z);
    for (int l = 0; l < n; ++l) EXPECT_NEAR(std::abs(v[l] - oracle::eval(Fo[l], z)), 0, 1e-13);
    EXPECT_EQ(F.evaluate(CVector::Zero(n)).norm(), 0.0);
  }
}

TEST(Field, RejectsInvalidInput) {
  EXPECT_THROW(kclf::make_field(2, {{0, MultiIndex{0, 0}, 1.0}}), std::invalid_argument);
  EXPECT_THROW(kclf::make_field(2, {{0, MultiIndex{1, 0}, std::nan("")}}), std::invalid_argument);
  EXPECT_THROW(kclf::make_field(2, {{2, MultiIndex{1, 0}, 1.0}}), std::invalid_argument);
  // A recorded tail norm below the stored coefficients is impossible.
  EXPECT_THROW(kclf::make_field(1, {{0, MultiIndex{1}, -2.0}}, {1.0}), std::invalid_argument);
}

TEST(Field, TailNorms) {
  const auto F = kclf::make_field(1, {{0, MultiIndex{1}, -1.0}, {0, MultiIndex{3}, 0.5}}, {2.0});
  EXPECT_DOUBLE_EQ(F.stored_l1(0), 1.5);
  EXPECT_DOUBLE_EQ(F.l1_norm(0), 2.0);
  const auto G = kclf::make_field(1, {{0, MultiIndex{1}, -1.0}, {0, MultiIndex{3}, 0.5}});
  EXPECT_DOUBLE_EQ(G.l1_norm(0), 1.5);
}

TEST(Field, JacobianAtOrigin) {
  const auto fam = kclf::example1_family(1.0, 0.3);
  EXPECT_TRUE(fam.subsystems[1].jacobian_at_origin().isApprox(mat2(-1, 0, 0, -1)));
  const auto F = kclf::make_field(
      2, {{0, MultiIndex{1, 0}, -1.0}, {0, MultiIndex{0, 1}, 2.0}, {1, MultiIndex{0, 1}, -3.0}});
  EXPECT_EQ(F.jacobian_at_origin(), mat2(-1, 2, 0, -3));
  const auto Q = kclf::make_field(2, {{0, MultiIndex{2, 0}, 1.0}, {1, MultiIndex{1, 1}, 1.0}});
  EXPECT_EQ(Q.jacobian_at_origin(), CMatrix::Zero(2, 2));
}

TEST(Bracket, ExampleThreeOneUnderTheDefinedConvention) {
  const double a = 1.3, b = 0.7, g = 0.4;
  const auto F1 = ex31(a, b, g, 1), F2 = ex31(a, b, g, 2), F3 = ex31(a, b, g, 3);
  const auto from = support::from_field;
  // [F, G] = JG F - JF G puts the stated F3 at [F2, F1].
  EXPECT_LT(support::field_distance(from(kclf::lie_bracket(F2, F1)), from(F3)), 1e-15);
  EXPECT_LT(support::field_distance(from(kclf::lie_bracket(F1, F2)),
                                    oracle::bracket(from(F1), from(F2))),
            1e-15);
  auto scaled = [](const PolyVectorField& F, double s) {
    oracle::Field o = support::from_field(F);
    for (auto& p : o)
      for (auto& [e, c] : p) c *= s;
    return o;
  };
  EXPECT_LT(support::field_distance(from(kclf::lie_bracket(F3, F1)), scaled(F3, a)), 1e-15);
  EXPECT_LT(support::field_distance(from(kclf::lie_bracket(F3, F2)), scaled(F3, b)), 1e-15);
}

TEST(Bracket, SelfAndCommutingDiagonalVanish) {
  oracle::Rng rng(2);
  const auto F = support::to_field(oracle::random_field(rng, 2, 3, false));
  EXPECT_EQ(kclf::lie_bracket(F, F).term_count(), 0u);
  const auto D1 = kclf::linear_field(mat2(-1, 0, 0, -2));
  const auto D2 = kclf::linear_field(mat2(-3, 0, 0, -0.5));
  EXPECT_EQ(kclf::lie_bracket(D1, D2).term_count(), 0u);
}

TEST(Bracket, MatchesOracleBilinearAntisymmetricJacobi) {
  oracle::Rng rng(3);
  for (int t = 0; t < 15; ++t) {
    const int n = 1 + t % 3;
    const auto Fo = oracle::random_field(rng, n, 3, false, 0.4);
    const auto Go = oracle::random_field(rng, n, 3, false, 0.4);
    const auto Ho = oracle::random_field(rng, n, 2, false, 0.4);
    const auto F = support::to_field(Fo), G = support::to_field(Go), H = support::to_field(Ho);
    const auto FG = support::from_field(kclf::lie_bracket(F, G));
    const double scale = 1e-12;
    EXPECT_LT(support::field_distance(FG, oracle::bracket(Fo, Go)), scale);
    // Antisymmetry.
    auto GF = support::from_field(kclf::lie_bracket(G, F));
    for (auto& p : GF)
      for (auto& [e, c] : p) c = -c;
    EXPECT_LT(support::field_distance(FG, GF), scale);
    // Bilinearity in the second slot: [F, G + 2H] = [F, G] + 2 [F, H].
    oracle::Field G2H = Go;
    for (std::size_t l = 0; l < Ho.size(); ++l)
      for (const auto& [e, c] : Ho[l]) oracle::add(G2H[l], e, 2.0 * c);
    oracle::Field rhs = FG;
    const oracle::Field FH = support::from_field(kclf::lie_bracket(F, H));
    for (std::size_t l = 0; l < rhs.size(); ++l)
      for (const auto& [e, c] : FH[l]) oracle::add(rhs[l], e, 2.0 * c);
    EXPECT_LT(support::field_distance(
                  support::from_field(kclf::lie_bracket(F, support::to_field(G2H))), rhs),
              1e-11);
    // Jacobi.
    oracle::Field sum(n);
    for (const auto& term : {kclf::lie_bracket(F, kclf::lie_bracket(G, H)),
                             kclf::lie_bracket(G, kclf::lie_bracket(H, F)),
                             kclf::lie_bracket(H, kclf::lie_bracket(F, G))})
      for (int l = 0; l < n; ++l)
        for (const auto& [a, c] : term.component(l).terms()) oracle::add(sum[l], a.exponents(), c);
    double worst = 0;
    for (const auto& p : sum)
      for (const auto& [e, c] : p) worst = std::max(worst, std::abs(c));
    EXPECT_LT(worst, 1e-10);
    // Linear part of the bracket is the matrix bracket of the linear parts.
    const CMatrix JF = F.jacobian_at_origin(), JG = G.jacobian_at_origin();
    EXPECT_LT((kclf::lie_bracket(F, G).jacobian_at_origin() - (JG * JF - JF * JG)).norm(), 1e-12);
  }
}

TEST(Flow, ScalarDecay) {
  const auto F = kclf::linear_field(CMatrix::Constant(1, 1, -1.0));
  const CVector z = kclf::flow(F, CVector::Constant(1, 1.0), 1.0, 1e-3);
  EXPECT_NEAR(z[0].real(), std::exp(-1.0), 1e-9);
}

TEST(Flow, DecoupledLinear) {
  const auto F = kclf::linear_field(mat2(-1, 0, 0, -1));
  const CVector z = kclf::flow(F, vec({1.0, Complex(0, 1)}), std::log(2.0), 1e-3);
  EXPECT_NEAR(std::abs(z[0] - 0.5), 0, 1e-8);
  EXPECT_NEAR(std::abs(z[1] - Complex(0, 0.5)), 0, 1e-8);
}

TEST(Flow, LinearMatchesMatrixExponential) {
  oracle::Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 4;
    CMatrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.complex();
    const double normA = A.cwiseAbs().rowwise().sum().maxCoeff();
    CVector z0(n);
    for (int i = 0; i < n; ++i) z0[i] = rng.complex();
    const auto F = kclf::linear_field(A);
    // ||A|| dt = 0.02: within 1e-8 of the exact flow.
    const CVector z = kclf::flow(F, z0, 1.0, 0.02 / normA);
    EXPECT_LT((z - oracle::expm(A) * z0).norm(), 1e-8 * std::max(1.0, z.norm()));
    // ||A|| dt = 0.1: RK4 is exactly the degree-4 Taylor propagator per step.
    const int steps = static_cast<int>(std::ceil(normA / 0.1));
    const double h = 1.0 / steps;
    const CMatrix hA = h * A, I = CMatrix::Identity(n, n);
    const CMatrix T4 = I + hA + hA * hA / 2.0 + hA * hA * hA / 6.0 + hA * hA * hA * hA / 24.0;
    CVector want = z0;
    for (int s = 0; s < steps; ++s) want = T4 * want;
    EXPECT_LT((kclf::flow(F, z0, 1.0, h) - want).norm(), 1e-12 * std::max(1.0, want.norm()));
  }
}

TEST(Flow, ExampleOneDecaysAndAgreesWithHalfStep) {
  const auto F = kclf::example1_family(1.0, 0.3).subsystems[1];
  CVector z = vec({0.5, 0.5});
  double prev = z.cwiseAbs().maxCoeff();
  for (int i = 0; i < 100; ++i) {
    z = kclf::flow(F, z, 0.1, 1e-3);
    const double now = z.cwiseAbs().maxCoeff();
    EXPECT_LE(now, prev + 1e-15);
    prev = now;
  }
  EXPECT_LT(prev, 1e-3);
  // RK4 error shrinks by ~16 per halving: the Richardson estimate is tiny.
  const CVector a = kclf::flow(F, vec({0.5, 0.5}), 2.0, 1e-2);
  const CVector b = kclf::flow(F, vec({0.5, 0.5}), 2.0, 5e-3);
  EXPECT_LT((a - b).norm() / 15.0, 1e-10);
}

TEST(Flow, RejectsBadStepAndFlagsBlowUp) {
  const auto F = kclf::make_field(1, {{0, MultiIndex{2}, 1.0}});
  EXPECT_THROW(kclf::flow_step(F, CVector::Constant(1, 1.0), 0.0), std::invalid_argument);
  EXPECT_THROW(kclf::flow(F, CVector::Constant(1, 1e200), 1.0, 0.1), kclf::NonFiniteState);
}

TEST(Invariance, LinearContraction) {
  const auto r = kclf::boundary_invariance_check(kclf::linear_field(mat2(-1, 0, 0, -1)), 0.9, 4);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.worst_value, -0.81, 1e-12);
}

TEST(Invariance, ExampleOneHolds) {
  const auto F = kclf::example1_family(1.0, 0.25).subsystems[1];
  const auto r = kclf::boundary_invariance_check(F, 0.9, 4);
  EXPECT_TRUE(r.holds);
  EXPECT_LT(r.worst_value, 0.0);
}

TEST(Invariance, OutwardFaceFails) {
  const auto r = kclf::boundary_invariance_check(kclf::linear_field(mat2(1, 0, 0, -1)), 0.5, 4);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.worst_value, 0.25, 1e-12);
  EXPECT_EQ(r.worst_face, 0);
}

TEST(Halton, RadicalInverse) {
  EXPECT_DOUBLE_EQ(kclf::radical_inverse(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(kclf::radical_inverse(3, 2), 0.75);
  EXPECT_DOUBLE_EQ(kclf::radical_inverse(1, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(kclf::radical_inverse(4, 3), 4.0 / 9.0);
}
