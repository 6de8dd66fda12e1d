#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kclf/multiindex.hpp"
#include "oracles.hpp"

using kclf::MultiIndex;
using kclf::MultiIndexBasis;

namespace {

std::vector<std::vector<int>> table_of(const MultiIndexBasis& b) {
  std::vector<std::vector<int>> t;
  for (const auto& a : b.table()) t.push_back(a.exponents());
  return t;
}

}  // namespace

TEST(Basis, SingleVariableOrdersByDegree) {
  EXPECT_EQ(table_of(MultiIndexBasis(1, 3)), (std::vector<std::vector<int>>{{0}, {1}, {2}, {3}}));
}

TEST(Basis, TwoVariablesDegreeTwo) {
  const std::vector<std::vector<int>> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(table_of(MultiIndexBasis(2, 2)), want);
  EXPECT_EQ(table_of(MultiIndexBasis(2, 2)), oracle::sorted_basis(2, 2));
}

TEST(Basis, ThreeVariablesDegreeOne) {
  const std::vector<std::vector<int>> want{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_EQ(table_of(MultiIndexBasis(3, 1)), want);
}

TEST(Basis, MatchesSortedRandomPermutation) {
  std::mt19937 g(5);
  for (int n = 1; n <= 4; ++n)
    for (int N = 0; N <= 8; ++N) {
      auto all = oracle::sorted_basis(n, N);
      std::shuffle(all.begin(), all.end(), g);
      std::vector<MultiIndex> shuffled;
      for (const auto& e : all) shuffled.emplace_back(e);
      std::sort(shuffled.begin(), shuffled.end(), kclf::GradedLexLess{});
      const MultiIndexBasis b(n, N);
      ASSERT_EQ(b.size(), shuffled.size());
      ASSERT_EQ(b.size(), kclf::basis_size(n, N));
      for (std::size_t k = 0; k < b.size(); ++k) ASSERT_EQ(b[k], shuffled[k]) << n << " " << N;
      EXPECT_EQ(table_of(b), oracle::sorted_basis(n, N));
    }
}

TEST(Basis, IndexOfRoundTripsAndDegreesAreMonotone) {
  const MultiIndexBasis b(3, 6);
  for (std::size_t k = 0; k < b.size(); ++k) {
    ASSERT_EQ(b.index_of(b[k]), k);
    if (k > 0) {
      EXPECT_LE(b[k - 1].degree(), b[k].degree());
      EXPECT_TRUE(kclf::graded_lex_less(b[k - 1], b[k]));
      EXPECT_FALSE(kclf::graded_lex_less(b[k], b[k - 1]));
    }
  }
}

TEST(Basis, IndexOfExamples) {
  const MultiIndexBasis b(2, 2);
  EXPECT_EQ(b.index_of(MultiIndex{1, 1}), 4u);
  EXPECT_EQ(b.index_of(MultiIndex{0, 0}), 0u);
  EXPECT_FALSE(b.index_of(MultiIndex{3, 0}).has_value());
  EXPECT_THROW(b.index_of(MultiIndex{1, 1, 0}), std::invalid_argument);
}

TEST(Basis, DegreeOffsetsAndParents) {
  const MultiIndexBasis b(3, 5);
  for (int d = 0; d <= 5; ++d) {
    const std::size_t off = b.degree_offset(d);
    EXPECT_EQ(b[off].degree(), d);
    if (off > 0) {
      EXPECT_EQ(b[off - 1].degree(), d - 1);
    }
  }
  EXPECT_EQ(b.degree_offset(6), b.size());
  for (std::size_t k = 1; k < b.size(); ++k)
    EXPECT_EQ(b[b.parent(k)] + MultiIndex::unit(3, b.parent_slot(k)), b[k]);
}

TEST(Basis, RejectsBadArguments) {
  EXPECT_THROW(MultiIndexBasis(0, 2), std::invalid_argument);
  EXPECT_THROW(MultiIndexBasis(2, -1), std::invalid_argument);
  EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
}

TEST(ShiftIndex, Examples) {
  // Slot l = 1 in the 1-based convention is slot 0 here.
  EXPECT_EQ(kclf::shift_index(MultiIndex{1, 0}, 0, MultiIndex{2, 0}), MultiIndex({2, 0}));
  EXPECT_EQ(kclf::shift_index(MultiIndex{1, 0}, 0, MultiIndex{1, 0}), MultiIndex({1, 0}));
  EXPECT_FALSE(kclf::shift_index(MultiIndex{0, 2}, 0, MultiIndex{0, 1}).has_value());
}

TEST(ShiftIndex, AgreesWithDefinition) {
  const MultiIndexBasis b(2, 4);
  for (const auto& a : b.table())
    for (const auto& g : b.table())
      for (int l = 0; l < 2; ++l) {
        std::vector<int> e(2);
        bool ok = true;
        for (int i = 0; i < 2; ++i) {
          e[i] = g[i] - a[i] + (i == l);
          ok = ok && e[i] >= 0;
        }
        const auto s = kclf::shift_index(a, l, g);
        ASSERT_EQ(s.has_value(), ok);
        if (ok) {
          EXPECT_EQ(s->exponents(), e);
        }
      }
}

TEST(Monomials, EvaluateMatchesPowers) {
  const MultiIndexBasis b(2, 5);
  const Eigen::VectorXcd z = (Eigen::VectorXcd(2) << oracle::Complex(0.3, -0.2), 0.7).finished();
  std::vector<oracle::Complex> out;
  kclf::evaluate_monomials(b, z, out);
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto want = std::pow(z[0], b[k][0]) * std::pow(z[1], b[k][1]);
    EXPECT_NEAR(std::abs(out[k] - want), 0.0, 1e-15);
  }
}
