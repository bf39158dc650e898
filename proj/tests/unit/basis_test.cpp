#include "anovasvm/basis.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "test_util.hpp"

namespace anovasvm {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

BasisIndex cosine_index(std::vector<int> dims, std::vector<int> freq) {
  BasisIndex b;
  b.kind = BasisKind::cosine;
  b.dims = std::move(dims);
  b.freq = std::move(freq);
  return b;
}

BasisIndex haar_index(std::vector<int> dims, std::vector<int> level, std::vector<int> shift) {
  BasisIndex b;
  b.kind = BasisKind::haar;
  b.dims = std::move(dims);
  b.level = std::move(level);
  b.shift = std::move(shift);
  return b;
}

// composite trapezoidal weights on [0, 1/2] with n intervals
std::vector<double> trapezoid_weights(int n) {
  std::vector<double> w(static_cast<std::size_t>(n + 1), 0.5 / n);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

TEST(CosineBasisTest, Examples) {
  const std::array<double, 2> x0{0.0, 0.3};
  EXPECT_EQ(eval_cosine(cosine_index({}, {}), x0), 1.0);
  EXPECT_DOUBLE_EQ(eval_cosine(cosine_index({1}, {1}), x0), kSqrt2);
  const std::array<double, 1> quarter{0.25};
  EXPECT_NEAR(eval_cosine(cosine_index({1}, {2}), quarter), -kSqrt2, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_1d(3, 0.0, CosineNormalization::factor2), 2.0);
  EXPECT_DOUBLE_EQ(cosine_constant(CosineNormalization::orthonormal), kSqrt2);
}

TEST(CosineBasisTest, DomainCheck) {
  EXPECT_NO_THROW(cosine_1d(1, 0.5 + 1e-13));
  EXPECT_NO_THROW(cosine_1d(1, -1e-13));
  EXPECT_ERROR_CODE(cosine_1d(1, 0.6), ErrorCode::domain_error);
  EXPECT_ERROR_CODE(cosine_1d(1, -1e-9), ErrorCode::domain_error);
  const std::array<double, 2> bad{0.1, 0.7};
  EXPECT_ERROR_CODE(eval_cosine(cosine_index({1}, {1}), bad), ErrorCode::domain_error);
}

TEST(CosineBasisTest, OrthonormalInOneDimension) {
  const int n = 2048;
  const auto w = trapezoid_weights(n);
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b) {
      double ip = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double x = 0.5 * i / n;
        ip += w[static_cast<std::size_t>(i)] * cosine_1d(a, x) * cosine_1d(b, x);
      }
      EXPECT_NEAR(2.0 * ip, a == b ? 1.0 : 0.0, 1e-10) << a << "," << b;
    }
}

TEST(CosineBasisTest, OrthonormalInTwoDimensions) {
  const int n = 1024;
  const auto w = trapezoid_weights(n);
  test::Gen gen(11);
  for (int trial = 0; trial < 24; ++trial) {
    const std::vector<int> ka{gen.integer(0, 8), gen.integer(0, 8)};
    std::vector<int> kb = trial % 3 == 0 ? ka : std::vector<int>{gen.integer(0, 8), gen.integer(0, 8)};
    auto make = [](const std::vector<int>& k) {
      BasisIndex idx;
      for (int i = 0; i < 2; ++i)
        if (k[static_cast<std::size_t>(i)] > 0) {
          idx.dims.push_back(i + 1);
          idx.freq.push_back(k[static_cast<std::size_t>(i)]);
        }
      return idx;
    };
    const auto A = make(ka), B = make(kb);
    double ip = 0.0;
    std::array<double, 2> x{};
    for (int i = 0; i <= n; ++i) {
      x[0] = 0.5 * i / n;
      for (int j = 0; j <= n; ++j) {
        x[1] = 0.5 * j / n;
        ip += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * eval_cosine(A, x) * eval_cosine(B, x);
      }
    }
    EXPECT_NEAR(4.0 * ip, ka == kb ? 1.0 : 0.0, 1e-10);
  }
}

TEST(HaarBasisTest, Examples) {
  const std::array<double, 1> a{-0.4}, b{0.1}, c{-0.2};
  EXPECT_EQ(eval_haar(haar_index({}, {}, {}), a), 1.0);
  EXPECT_EQ(haar_1d(-1, 0, 0.3), 1.0);
  EXPECT_EQ(eval_haar(haar_index({1}, {0}, {0}), a), 1.0);
  EXPECT_EQ(eval_haar(haar_index({1}, {0}, {0}), b), -1.0);
  // wrap(-0.2) = 0.3: 4 * 0.3 - 1 = 0.2 lies in the positive half
  EXPECT_DOUBLE_EQ(haar_wrap(-0.2), 0.3);
  EXPECT_DOUBLE_EQ(eval_haar(haar_index({1}, {2}, {1}), c), 2.0);
  EXPECT_EQ(eval_haar(haar_index({1}, {2}, {2}), c), 0.0);
}

TEST(HaarBasisTest, WrapIsHalfOpen) {
  EXPECT_EQ(haar_wrap(-0.5), 0.0);
  EXPECT_EQ(haar_wrap(0.5), 0.0);
  EXPECT_DOUBLE_EQ(haar_wrap(0.25), 0.75);
}

TEST(HaarBasisTest, OrthonormalOnDyadicCells) {
  // every function up to level 4 is constant on cells of width 2^-6
  const int cells = 64;
  struct Fn {
    int j, k;
  };
  std::vector<Fn> fns{{-1, 0}};
  for (int j = 0; j <= 4; ++j)
    for (int k = 0; k < (1 << j); ++k) fns.push_back({j, k});
  for (const auto& f : fns)
    for (const auto& g : fns) {
      double ip = 0.0;
      for (int c = 0; c < cells; ++c) {
        const double x = (c + 0.5) / cells - 0.5;
        ip += haar_1d(f.j, f.k, x) * haar_1d(g.j, g.k, x) / cells;
      }
      EXPECT_NEAR(ip, (f.j == g.j && f.k == g.k) ? 1.0 : 0.0, 1e-15) << f.j << "," << f.k << " " << g.j << "," << g.k;
    }
}

TEST(HaarBasisTest, Periodic) {
  test::Gen gen(5);
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 2> x{gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)};
    const std::array<double, 2> shifted{x[0] + 1.0, x[1] - 1.0};
    const int j1 = gen.integer(0, 4), j2 = gen.integer(0, 4);
    const auto idx = haar_index({1, 2}, {j1, j2}, {gen.integer(0, (1 << j1) - 1), gen.integer(0, (1 << j2) - 1)});
    EXPECT_EQ(eval_haar(idx, x), eval_haar(idx, shifted));
  }
}

TEST(TensorTest, Examples) {
  const auto cfam = enumerate_subsets(2, 2);
  const auto cset = build_cosine_set(cfam, bandwidths_by_order(cfam, std::array<int, 2>{4, 4}));
  const std::array<double, 2> origin{0.0, 0.0};
  EXPECT_EQ(eval_tensor(cset, 0, origin), 1.0);
  // term {1,2} starts with k = (1,1)
  EXPECT_DOUBLE_EQ(eval_tensor(cset, cset.block_of(AnovaSubset{1, 2}).offset, origin), 2.0);

  const auto hset = build_wavelet_set(cfam, bandwidths_by_order(cfam, std::array<int, 2>{2, 2}));
  const std::array<double, 2> x{-0.4, 0.37};
  EXPECT_EQ(eval_tensor(hset, 0, x), 1.0);
  EXPECT_EQ(eval_tensor(hset, hset.block_of(AnovaSubset{1}).offset, x), 1.0);
  EXPECT_ERROR_CODE(eval_tensor(hset, hset.cardinality(), x), ErrorCode::index_error);
}

TEST(TensorTest, ProductOfUnivariateFactors) {
  test::Gen gen(3);
  const auto family = enumerate_subsets(4, 2);
  const auto cset = build_cosine_set(family, bandwidths_by_order(family, std::array<int, 2>{8, 6}));
  const auto hset = build_wavelet_set(family, bandwidths_by_order(family, std::array<int, 2>{3, 2}));
  for (int trial = 0; trial < 500; ++trial) {
    {
      const auto pos = static_cast<std::size_t>(gen.integer(0, static_cast<int>(cset.cardinality()) - 1));
      const std::array<double, 4> x{gen.uniform(0, 0.5), gen.uniform(0, 0.5), gen.uniform(0, 0.5), gen.uniform(0, 0.5)};
      const auto idx = index_at(cset, pos);
      double expected = 1.0;
      for (std::size_t i = 0; i < idx.dims.size(); ++i)
        expected *= kSqrt2 * std::cos(2.0 * std::numbers::pi * idx.freq[i] * x[static_cast<std::size_t>(idx.dims[i] - 1)]);
      EXPECT_NEAR(eval_tensor(cset, pos, x), expected, 1e-14);
    }
    {
      const auto pos = static_cast<std::size_t>(gen.integer(0, static_cast<int>(hset.cardinality()) - 1));
      const std::array<double, 4> x{gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5),
                                    gen.uniform(-0.5, 0.5)};
      const auto idx = index_at(hset, pos);
      double expected = 1.0;
      for (std::size_t i = 0; i < idx.dims.size(); ++i)
        expected *= haar_1d(idx.level[i], idx.shift[i], x[static_cast<std::size_t>(idx.dims[i] - 1)]);
      EXPECT_NEAR(eval_tensor(hset, pos, x), expected, 1e-14);
    }
  }
}

}  // namespace
}  // namespace anovasvm
