#include "anovasvm/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "anovasvm/random.hpp"
#include "test_util.hpp"

#ifndef ANOVASVM_DATA_DIR
#define ANOVASVM_DATA_DIR "data"
#endif

namespace anovasvm {
namespace {

std::string message_of(const std::string& text, const DelimitedOptions& o = {}) {
  try {
    parse_delimited(text, o);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

Dataset counting(std::size_t rows, std::size_t positives) {
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(rows), 1);
  d.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    d.X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    d.y[static_cast<Eigen::Index>(i)] = i < positives ? 1.0 : -1.0;
  }
  return d;
}

TEST(DelimitedTest, LabelFirst) {
  const auto d = parse_delimited("1,0.5,2\n0,1.5,-3\n");
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.dimension(), 2);
  EXPECT_EQ(d.y[0], 1.0);
  EXPECT_EQ(d.y[1], -1.0);
  EXPECT_EQ(d.X(1, 1), -3.0);
  EXPECT_EQ(d.alphabet, LabelAlphabet::zero_one);
  EXPECT_EQ(d.positives(), 1u);
}

TEST(DelimitedTest, OptionsAndHeader) {
  DelimitedOptions o;
  o.delimiter = ';';
  o.label_column = -1;
  o.header = true;
  const auto d = parse_delimited("a;b;class\n\n0.1;0.2;+1\n0.3;0.4;-1\n", o);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.X(1, 0), 0.3);
  EXPECT_EQ(d.y[1], -1.0);
  EXPECT_EQ(d.alphabet, LabelAlphabet::plus_minus_one);

  DelimitedOptions limited;
  limited.max_rows = 2;
  EXPECT_EQ(parse_delimited("1,1\n0,2\n1,3\n", limited).size(), 2u);
}

TEST(DelimitedTest, ErrorsNameTheLine) {
  DelimitedOptions header;
  header.header = true;
  EXPECT_TRUE(contains(message_of("label,x\n", header), "no data rows"));
  EXPECT_TRUE(contains(message_of(""), "no data rows"));
  const auto ragged = message_of("1,2,3\n0,1\n");
  EXPECT_TRUE(contains(ragged, "line 2")) << ragged;
  EXPECT_TRUE(contains(ragged, "expected 3 fields")) << ragged;
  const auto text = message_of("1,2\n0,3\n1,abc\n");
  EXPECT_TRUE(contains(text, "line 3")) << text;
  EXPECT_TRUE(contains(text, "abc")) << text;
  const auto label = message_of("1,2\n2,3\n");
  EXPECT_TRUE(contains(label, "line 2")) << label;
  EXPECT_TRUE(contains(message_of("0,1\n-1,2\n"), "mix"));
  EXPECT_TRUE(contains(message_of("1,nan\n"), "line 1"));
  DelimitedOptions far;
  far.label_column = 5;
  EXPECT_TRUE(contains(message_of("1,2\n", far), "out of range"));
}

TEST(LibsvmTest, Examples) {
  const auto d = parse_libsvm("+1 1:0.5 3:2\n-1 2:1 # comment\n\n");
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.dimension(), 3);
  EXPECT_EQ(d.X(0, 1), 0.0);
  EXPECT_EQ(d.X(0, 2), 2.0);
  EXPECT_EQ(d.X(1, 1), 1.0);
  EXPECT_EQ(d.y[1], -1.0);
}

TEST(LibsvmTest, Errors) {
  EXPECT_ERROR_CODE(parse_libsvm("+1 3:1 2:1\n"), ErrorCode::parse_error);
  EXPECT_ERROR_CODE(parse_libsvm("+1 0:1\n"), ErrorCode::parse_error);
  EXPECT_ERROR_CODE(parse_libsvm("+1 1=1\n"), ErrorCode::parse_error);
  EXPECT_ERROR_CODE(parse_libsvm("+1 1:x\n"), ErrorCode::parse_error);
  EXPECT_ERROR_CODE(parse_libsvm("# only a comment\n"), ErrorCode::parse_error);
  try {
    parse_libsvm("+1 1:1\n-1 2:2 2:3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(contains(e.what(), "line 2")) << e.what();
  }
}

TEST(LibsvmTest, WriteReadIsIdempotent) {
  test::Gen gen(2);
  Dataset d;
  d.X = Matrix::Zero(20, 5);
  d.y = gen.labels(20);
  for (Eigen::Index r = 0; r < 20; ++r)
    for (Eigen::Index c = 0; c < 5; ++c)
      if (gen.integer(0, 2) == 0) d.X(r, c) = gen.uniform(-10, 10);
  d.X(0, 4) = 1.0;  // fixes the width
  std::ostringstream first;
  write_libsvm(first, d);
  const auto back = parse_libsvm(first.str());
  EXPECT_EQ(back.X, d.X);
  EXPECT_EQ(back.y, d.y);
  std::ostringstream second;
  write_libsvm(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(DelimitedTest, RoundTripKeepsAlphabet) {
  test::Gen gen(3);
  for (LabelAlphabet a : {LabelAlphabet::zero_one, LabelAlphabet::plus_minus_one}) {
    Dataset d;
    d.X = Matrix::NullaryExpr(10, 3, [&] { return gen.uniform(-1e3, 1e3); });
    d.y = gen.labels(10);
    d.alphabet = a;
    std::ostringstream out;
    write_delimited(out, d, ',', true);
    DelimitedOptions o;
    o.header = true;
    const auto back = parse_delimited(out.str(), o);
    EXPECT_EQ(back.X, d.X);
    EXPECT_EQ(back.y, d.y);
    EXPECT_EQ(back.alphabet, a);
    EXPECT_EQ(back.names, (std::vector<std::string>{"x1", "x2", "x3"}));
  }
  EXPECT_EQ(format_label(1, LabelAlphabet::zero_one), "1");
  EXPECT_EQ(format_label(-1, LabelAlphabet::zero_one), "0");
  EXPECT_EQ(format_label(-1, LabelAlphabet::plus_minus_one), "-1");
}

TEST(DatasetTest, ValidateAndSubset) {
  const auto d = counting(5, 2);
  EXPECT_NO_THROW(d.validate());
  const auto s = d.subset({4, 0});
  EXPECT_EQ(s.X(0, 0), 4.0);
  EXPECT_EQ(s.y[1], 1.0);
  EXPECT_ERROR_CODE(d.subset({5}), ErrorCode::index_error);
  Dataset bad = d;
  bad.y[0] = 0.0;
  EXPECT_ERROR_CODE(bad.validate(), ErrorCode::invalid_argument);
}

TEST(ScalingTest, EndpointsAndMidpoints) {
  Matrix X(3, 2);
  X << 2, 7, 4, 7, 6, 7;
  const auto cos = fit_scaling(X, BasisKind::cosine);
  EXPECT_EQ(cos.constant, (std::vector<bool>{false, true}));
  const Matrix a = apply_scaling(cos, X);
  EXPECT_EQ(a(0, 0), 0.0);
  EXPECT_EQ(a(1, 0), 0.25);
  EXPECT_EQ(a(2, 0), 0.5);
  EXPECT_EQ(a.col(1), Vector::Constant(3, 0.25));

  const auto haar = fit_scaling(X, BasisKind::haar);
  const Matrix h = apply_scaling(haar, X);
  EXPECT_EQ(h(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(h(2, 0), 0.5 - kHaarUpperGap);
  EXPECT_LT(h(2, 0), 0.5);
  EXPECT_EQ(h.col(1), Vector::Zero(3));
}

TEST(ScalingTest, ClampsAndCounts) {
  Matrix X(2, 1);
  X << 0, 10;
  const auto rec = fit_scaling(X, BasisKind::cosine);
  Matrix T(4, 1);
  T << -5, 5, 10, 25;
  std::size_t clamped = 99;
  const Matrix s = apply_scaling(rec, T, &clamped);
  EXPECT_EQ(clamped, 2u);
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_EQ(s(1, 0), 0.25);
  EXPECT_EQ(s(3, 0), 0.5);
  EXPECT_ERROR_CODE(apply_scaling(rec, Matrix::Zero(1, 2)), ErrorCode::invalid_argument);
}

TEST(ScalingTest, HalvingMatchesCosineRange) {
  // data already spanning [0,1] maps to x/2
  test::Gen gen(4);
  Matrix X = Matrix::NullaryExpr(50, 3, [&] { return gen.uniform(0.0, 1.0); });
  X.row(0).setZero();
  X.row(1).setOnes();
  const Matrix s = apply_scaling(fit_scaling(X, BasisKind::cosine), X);
  EXPECT_LT((s - X / 2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ScalingTest, StaysInDomain) {
  test::Gen gen(5);
  for (BasisKind kind : {BasisKind::cosine, BasisKind::haar}) {
    const Matrix X = Matrix::NullaryExpr(40, 4, [&] { return gen.uniform(-100, 100); });
    const auto rec = fit_scaling(X, kind);
    const Matrix T = Matrix::NullaryExpr(40, 4, [&] { return gen.uniform(-300, 300); });
    const Matrix s = apply_scaling(rec, T);
    EXPECT_GE(s.minCoeff(), domain_lower(kind));
    EXPECT_LE(s.maxCoeff(), domain_upper(kind));
  }
}

TEST(SplitTest, Sizes) {
  EXPECT_EQ(train_count_for_ratio(768, 0.7), 538u);
  EXPECT_EQ(train_count_for_ratio(683, 2.0 / 3.0), 455u);
  const auto d = counting(683, 239);
  const auto s = split(d, 456, 1);
  EXPECT_EQ(s.train.size(), 456u);
  EXPECT_EQ(s.test.size(), 227u);
  const auto r = split_ratio(counting(768, 268), 0.7, 1);
  EXPECT_EQ(r.train.size(), 538u);
  EXPECT_EQ(r.test.size(), 230u);
  EXPECT_ERROR_CODE(split(d, 0, 1), ErrorCode::invalid_argument);
  EXPECT_ERROR_CODE(split(d, 683, 1), ErrorCode::invalid_argument);
  EXPECT_ERROR_CODE(train_count_for_ratio(10, 1.0), ErrorCode::invalid_argument);
}

TEST(SplitTest, PartitionAndDeterminism) {
  const auto d = counting(100, 40);
  for (std::uint64_t seed : {0ull, 1ull, 77ull}) {
    const auto a = split(d, 60, seed), b = split(d, 60, seed);
    EXPECT_EQ(a.train_rows, b.train_rows);
    EXPECT_EQ(a.test_rows, b.test_rows);
    std::set<std::size_t> all(a.train_rows.begin(), a.train_rows.end());
    all.insert(a.test_rows.begin(), a.test_rows.end());
    EXPECT_EQ(all.size(), 100u);
    EXPECT_EQ(*all.rbegin(), 99u);
    for (std::size_t i = 0; i < a.train_rows.size(); ++i)
      EXPECT_EQ(a.train.X(static_cast<Eigen::Index>(i), 0), static_cast<double>(a.train_rows[i]));
  }
  EXPECT_NE(split(d, 60, 1).train_rows, split(d, 60, 2).train_rows);
}

TEST(BundledDataTest, WbcShape) {
  const auto d = read_dataset(std::string(ANOVASVM_DATA_DIR) + "/wbc.csv");
  EXPECT_EQ(d.size(), 683u);
  EXPECT_EQ(d.dimension(), 9);
  EXPECT_EQ(d.positives(), 239u);
  EXPECT_NO_THROW(d.validate());
  const auto p = read_dataset(std::string(ANOVASVM_DATA_DIR) + "/pid.csv");
  EXPECT_EQ(p.size(), 768u);
  EXPECT_EQ(p.dimension(), 8);
  EXPECT_EQ(p.positives(), 268u);
}

TEST(BundledDataTest, MissingFile) {
  EXPECT_ERROR_CODE(read_dataset("/nonexistent/file.csv"), ErrorCode::io_error);
}

}  // namespace
}  // namespace anovasvm
