#include "anovasvm/transform.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "test_util.hpp"

namespace anovasvm {
namespace {

GroupedIndexSet u_set(BasisKind kind, int d, int ds, std::vector<int> per_order) {
  const auto family = enumerate_subsets(d, ds);
  return build_index_set(kind, family, bandwidths_by_order(family, per_order));
}

// entrywise evaluation through the basis module
Matrix oracle_matrix(const Matrix& X, const GroupedIndexSet& set) {
  Matrix D(X.rows(), static_cast<Eigen::Index>(set.cardinality()));
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    for (std::size_t p = 0; p < set.cardinality(); ++p) D(i, static_cast<Eigen::Index>(p)) = eval_tensor(set, p, row);
  }
  return D;
}

TEST(TransformTest, ConstantOnly) {
  const SubsetFamily family(1, {AnovaSubset{}});
  const auto set = build_cosine_set(family, {{}});
  const FeatureTransform t(Matrix::Constant(1, 1, 0.3), set);
  const Matrix D = t.dense();
  ASSERT_EQ(D.rows(), 1);
  ASSERT_EQ(D.cols(), 1);
  EXPECT_EQ(D(0, 0), 1.0);
}

TEST(TransformTest, ConstantColumnIsOnes) {
  Matrix X(3, 1);
  X << 0.0, 0.2, 0.45;
  const FeatureTransform t(X, u_set(BasisKind::cosine, 1, 1, {4}));
  const Matrix D = t.dense();
  ASSERT_EQ(D.cols(), 4);
  EXPECT_TRUE(D.col(0).isApprox(Vector::Ones(3)));
  EXPECT_TRUE(t.dense_block(AnovaSubset{}).isApprox(Matrix::Ones(3, 1)));
}

TEST(TransformTest, CosineBlockAtOrigin) {
  const FeatureTransform t(Matrix::Zero(1, 1), u_set(BasisKind::cosine, 1, 1, {4}));
  const Matrix B = t.dense_block(AnovaSubset{1});
  ASSERT_EQ(B.cols(), 3);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(B(0, j), std::numbers::sqrt2);
}

TEST(TransformTest, HaarBlocksMatchEvaluation) {
  test::Gen gen(21);
  const auto set = u_set(BasisKind::haar, 2, 2, {2, 2});
  const Matrix X = gen.points(5, 2, BasisKind::haar);
  const FeatureTransform t(X, set);
  const Matrix expected = oracle_matrix(X, set);
  EXPECT_EQ(t.dense(), expected);

  const auto one = u_set(BasisKind::haar, 1, 1, {1});
  const Matrix x1 = gen.points(7, 1, BasisKind::haar);
  const FeatureTransform t1(x1, one);
  const Matrix B = t1.dense_block(AnovaSubset{1});
  const auto off = one.block_of(AnovaSubset{1}).offset;
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      const auto idx = index_at(one, off + static_cast<std::size_t>(j));
      const std::array<double, 1> x{x1(i, 0)};
      EXPECT_EQ(B(i, j), eval_haar(idx, x));
    }
}

TEST(TransformTest, ApplyMatchesDenseOracle) {
  test::Gen gen(8);
  for (BasisKind kind : {BasisKind::cosine, BasisKind::haar}) {
    const auto set = kind == BasisKind::cosine ? u_set(kind, 2, 2, {6, 4}) : u_set(kind, 2, 2, {3, 2});
    const Matrix X = gen.points(40, 2, kind);
    const FeatureTransform t(X, set);
    const Matrix D = oracle_matrix(X, set);
    const auto n = static_cast<Eigen::Index>(set.cardinality());

    EXPECT_TRUE(t.apply(Vector::Unit(n, 0)).isApprox(Vector::Ones(40)));
    EXPECT_EQ(t.apply(Vector::Zero(n)), Vector::Zero(40));
    const Vector c = gen.vector(n);
    EXPECT_LT((t.apply(c) - D * c).cwiseAbs().maxCoeff(), 1e-12);

    EXPECT_EQ(t.apply_transpose(Vector::Zero(40)), Vector::Zero(n));
    EXPECT_LT((t.apply_transpose(Vector::Unit(40, 7)) - D.row(7).transpose()).cwiseAbs().maxCoeff(), 1e-15);
    const Vector v = gen.vector(40);
    EXPECT_LT((t.apply_transpose(v) - D.transpose() * v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TransformTest, AdjointIdentity) {
  test::Gen gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    const BasisKind kind = trial % 2 ? BasisKind::haar : BasisKind::cosine;
    const int d = gen.integer(1, 5);
    const auto set = kind == BasisKind::cosine ? u_set(kind, d, std::min(d, 2), {6, 4}) : u_set(kind, d, std::min(d, 2), {3, 2});
    ASSERT_LE(set.cardinality(), 500u);
    const auto M = static_cast<Eigen::Index>(gen.integer(1, 200));
    const FeatureTransform t(gen.points(M, d, kind), set);
    const Vector c = gen.vector(t.cols());
    const Vector v = gen.vector(M);
    const double lhs = t.apply(c).dot(v);
    const double rhs = c.dot(t.apply_transpose(v));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * c.norm() * v.norm());
  }
}

TEST(TransformTest, BlockAdditivity) {
  test::Gen gen(4);
  for (BasisKind kind : {BasisKind::cosine, BasisKind::haar}) {
    const auto set = u_set(kind, 3, 2, kind == BasisKind::cosine ? std::vector<int>{6, 4} : std::vector<int>{3, 2});
    const FeatureTransform t(gen.points(30, 3, kind), set);
    const Vector c = gen.vector(t.cols());
    Vector sum = Vector::Zero(30);
    for (std::size_t term = 0; term < set.terms().size(); ++term) {
      const auto b = set.block(term);
      sum += t.dense_block(term) * c.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length));
    }
    EXPECT_LT((t.apply(c) - sum).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(TransformTest, HaarRowSparsity) {
  test::Gen gen(6);
  for (int N = 0; N <= 6; ++N) {
    const auto set = u_set(BasisKind::haar, 1, 1, {N});
    const FeatureTransform t(gen.points(50, 1, BasisKind::haar), set);
    const std::size_t term = *set.term_index(AnovaSubset{1});
    const auto& S = t.sparse_block(term);
    for (Eigen::Index r = 0; r < S.outerSize(); ++r) {
      const auto nnz = S.outerIndexPtr()[r + 1] - S.outerIndexPtr()[r];
      EXPECT_LE(nnz, N + 2);
      EXPECT_EQ(nnz, N + 1) << "one shift per level meets each point";
    }
  }
}

TEST(TransformTest, DeterministicRebuild) {
  test::Gen gen(9);
  const auto set = u_set(BasisKind::cosine, 4, 2, {6, 4});
  const Matrix X = gen.points(25, 4, BasisKind::cosine);
  const Vector c = gen.vector(static_cast<Eigen::Index>(set.cardinality()));
  const Vector v = gen.vector(25);
  const FeatureTransform a(X, set), b(X, set);
  EXPECT_EQ(a.apply(c), b.apply(c));
  EXPECT_EQ(a.apply_transpose(v), b.apply_transpose(v));
}

TEST(TransformTest, Errors) {
  const auto set = u_set(BasisKind::cosine, 2, 2, {4, 4});
  Matrix X = Matrix::Constant(4, 2, 0.1);
  X(2, 1) = 0.8;
  try {
    FeatureTransform t(X, set);
    FAIL() << "expected a domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_error);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(FeatureTransform(Matrix::Constant(3, 3, 0.1), set), ErrorCode::invalid_argument);
  const FeatureTransform t(Matrix::Constant(3, 2, 0.1), set);
  EXPECT_ERROR_CODE(t.apply(Vector::Zero(2)), ErrorCode::invalid_argument);
  EXPECT_ERROR_CODE(t.apply_transpose(Vector::Zero(4)), ErrorCode::invalid_argument);
  EXPECT_ERROR_CODE(t.dense_block(AnovaSubset{3}), ErrorCode::not_found);
}

}  // namespace
}  // namespace anovasvm
