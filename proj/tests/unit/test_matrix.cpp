#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pcomq/matrix.hpp"

namespace pcomq {
namespace {

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix m = testing::random_matrix(3, 4, 1);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Matmul, HandComputedProduct) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{1}, {1}});
  EXPECT_EQ(matmul(a, b), Matrix::from_rows({{3}, {7}}));
}

TEST(Matmul, ZeroAnnihilates) {
  const Matrix m = testing::random_matrix(4, 5, 2);
  EXPECT_EQ(matmul(Matrix(3, 4), m), Matrix(3, 5));
}

TEST(Matmul, RejectsMismatchedShapes) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Matmul, AssociativeOnRandomTriples) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = testing::random_matrix(5, 7, seed * 3 + 0);
    const Matrix b = testing::random_matrix(7, 4, seed * 3 + 1);
    const Matrix c = testing::random_matrix(4, 6, seed * 3 + 2);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    EXPECT_LE(frob_norm_sq(subtract(left, right)), 1e-20 * frob_norm_sq(left)) << "seed " << seed;
  }
}

TEST(FrobNorm, Examples) {
  EXPECT_EQ(frob_norm_sq(Matrix(3, 3)), 0.0);
  EXPECT_EQ(frob_norm_sq(Matrix::from_rows({{3, 4}})), 25.0);
  EXPECT_EQ(frob_norm_sq(Matrix::identity(6)), 6.0);
}

TEST(FrobNorm, MatchesTraceOfGram) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = testing::random_matrix(6, 4, seed);
    const Matrix gram = matmul(transpose(a), a);
    double trace = 0.0;
    for (std::size_t k = 0; k < gram.rows(); ++k) trace += gram(k, k);
    EXPECT_NEAR(frob_norm_sq(a), trace, 1e-10 * trace);
  }
}

TEST(ColDot, Examples) {
  EXPECT_EQ(col_dot(Matrix(3, 2), 1, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(col_dot(Matrix::identity(2), 0, std::vector<double>{5, 7}), 5.0);
  EXPECT_EQ(col_dot(Matrix::from_rows({{1}, {2}}), 0, std::vector<double>{3, 4}), 11.0);
}

TEST(ColDot, RejectsBadIndexAndLength) {
  const Matrix a(2, 2);
  EXPECT_THROW(col_dot(a, 2, std::vector<double>{1, 2}), std::out_of_range);
  EXPECT_THROW(col_dot(a, 0, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Matrix, OperationsArePure) {
  const Matrix a = testing::random_matrix(4, 4, 9);
  const Matrix b = testing::random_matrix(4, 4, 10);
  const Matrix a_copy = a;
  const Matrix first = matmul(a, b);
  const Matrix second = matmul(a, b);
  EXPECT_EQ(a, a_copy);
  EXPECT_EQ(first, second);
}

TEST(Matrix, AddOuterAccumulates) {
  Matrix a(2, 3);
  add_outer(a, 2.0, std::vector<double>{1, -1}, std::vector<double>{1, 2, 3});
  EXPECT_EQ(a, Matrix::from_rows({{2, 4, 6}, {-2, -4, -6}}));
}

TEST(Matrix, RequireFiniteRejectsNan) {
  Matrix a(2, 2);
  a(1, 1) = std::nan("");
  EXPECT_THROW(require_finite(a, "a"), ShapeError);
}

}  // namespace
}  // namespace pcomq
