#include "anovasvm/model.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace anovasvm {
namespace {

Model random_model(BasisKind kind, bool with_scaling, std::uint32_t seed) {
  test::Gen gen(seed);
  const auto family = enumerate_subsets(4, 2);
  Model m;
  m.set = build_index_set(kind, family,
                          bandwidths_by_order(family, kind == BasisKind::cosine ? std::vector<int>{6, 4}
                                                                                 : std::vector<int>{2, 1}));
  m.coeffs = gen.vector(static_cast<Eigen::Index>(m.set.cardinality()));
  m.coeffs[1] = -0.0;
  m.coeffs[2] = std::numeric_limits<double>::denorm_min();
  m.coeffs[3] = 1.0 / 3.0;
  if (with_scaling) {
    const Matrix X = Matrix::NullaryExpr(30, 4, [&] { return gen.uniform(-50, 50); });
    m.scaling = fit_scaling(X, kind);
  }
  m.provenance.seed = 12345678901234567ull;
  m.provenance.reg = {RegKind::l1, 0.1};
  m.provenance.iterations = 77;
  m.provenance.objective = 0.123456789012345678;
  m.provenance.converged = true;
  m.provenance.stop = StopReason::objective_change;
  return m;
}

void expect_same(const Model& a, const Model& b) {
  EXPECT_EQ(a.basis(), b.basis());
  EXPECT_EQ(a.normalization, b.normalization);
  ASSERT_EQ(a.set.cardinality(), b.set.cardinality());
  for (std::size_t i = 0; i < a.set.terms().size(); ++i) {
    EXPECT_EQ(a.set.terms()[i].subset(), b.set.terms()[i].subset());
    EXPECT_EQ(a.set.terms()[i].bandwidth(), b.set.terms()[i].bandwidth());
  }
  ASSERT_EQ(a.coeffs.size(), b.coeffs.size());
  for (Eigen::Index i = 0; i < a.coeffs.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.coeffs[i]), std::bit_cast<std::uint64_t>(b.coeffs[i]));
  EXPECT_EQ(a.scaling.has_value(), b.scaling.has_value());
  if (a.scaling && b.scaling) {
    EXPECT_EQ(*a.scaling, *b.scaling);
  }
  EXPECT_EQ(a.provenance.seed, b.provenance.seed);
  EXPECT_EQ(a.provenance.reg.kind, b.provenance.reg.kind);
  EXPECT_EQ(a.provenance.reg.lambda, b.provenance.reg.lambda);
  EXPECT_EQ(a.provenance.iterations, b.provenance.iterations);
  EXPECT_EQ(a.provenance.objective, b.provenance.objective);
  EXPECT_EQ(a.provenance.converged, b.provenance.converged);
  EXPECT_EQ(a.provenance.stop, b.provenance.stop);
}

std::string replace_line(std::string text, const std::string& prefix, const std::string& line) {
  const auto at = text.find(prefix);
  const auto end = text.find('\n', at);
  return text.replace(at, end - at, line);
}

TEST(HexTest, ExactRoundTrip) {
  test::Gen gen(1);
  for (double v : {0.0, -0.0, 1.0, -2.5, 1e-300, std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max()}) {
    const auto h = double_to_hex(v);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(hex_to_double(h)), std::bit_cast<std::uint64_t>(v));
  }
  EXPECT_EQ(double_to_hex(1.0), "3ff0000000000000");
  EXPECT_ERROR_CODE(hex_to_double("3ff"), ErrorCode::format_error);
  EXPECT_ERROR_CODE(hex_to_double("3ff000000000000g"), ErrorCode::format_error);
}

TEST(ChecksumTest, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(ModelFileTest, BitExactRoundTrip) {
  for (BasisKind kind : {BasisKind::cosine, BasisKind::haar})
    for (bool scaled : {false, true}) {
      const auto m = random_model(kind, scaled, 2 + static_cast<std::uint32_t>(scaled));
      const auto text = serialize_model(m);
      const auto back = parse_model(text);
      expect_same(m, back);
      EXPECT_EQ(serialize_model(back), text);
    }
}

TEST(ModelFileTest, PathRoundTrip) {
  const auto m = random_model(BasisKind::cosine, true, 4);
  const auto path = (std::filesystem::temp_directory_path() / "anovasvm_model_test.model").string();
  save_model(m, path);
  expect_same(m, load_model(path));
  std::filesystem::remove(path);
  EXPECT_ERROR_CODE(load_model(path), ErrorCode::io_error);
  EXPECT_ERROR_CODE(save_model(m, "/nonexistent/dir/x.model"), ErrorCode::io_error);
}

TEST(ModelFileTest, RejectsDamage) {
  const auto text = serialize_model(random_model(BasisKind::haar, true, 5));
  EXPECT_ERROR_CODE(parse_model(""), ErrorCode::format_error);
  EXPECT_ERROR_CODE(parse_model(text.substr(0, text.size() / 2)), ErrorCode::format_error);
  EXPECT_ERROR_CODE(parse_model(text.substr(0, text.size() - 1)), ErrorCode::format_error);

  std::string flipped = text;
  const auto at = flipped.find("iterations 77");
  flipped[at + 11] = '8';
  try {
    parse_model(flipped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format_error);
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
  }

  const auto bumped = replace_line(text, "anovasvm-model", "anovasvm-model " + std::to_string(kModelFormatVersion + 1));
  try {
    parse_model(bumped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format_error);
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
  EXPECT_ERROR_CODE(parse_model("not-a-model 1\n"), ErrorCode::format_error);
}

TEST(ModelTest, DecisionValuesMatchTransform) {
  test::Gen gen(6);
  const auto m = random_model(BasisKind::cosine, false, 6);
  const Matrix X = gen.points(20, 4, BasisKind::cosine);
  const FeatureTransform t(X, m.set);
  EXPECT_EQ(m.decision_values(X), t.apply(m.coeffs));
  const Vector p = m.predict(X);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_EQ(p[i], t.apply(m.coeffs)[i] >= 0 ? 1.0 : -1.0);
}

TEST(ModelTest, ScalingIsApplied) {
  test::Gen gen(7);
  const auto m = random_model(BasisKind::haar, true, 7);
  const Matrix raw = Matrix::NullaryExpr(15, 4, [&] { return gen.uniform(-60, 60); });
  std::size_t clamped = 0;
  const Vector v = m.decision_values(raw, &clamped);
  const FeatureTransform t(apply_scaling(*m.scaling, raw), m.set);
  EXPECT_EQ(v, t.apply(m.coeffs));
  EXPECT_GT(clamped, 0u);
}

TEST(ModelTest, Validation) {
  auto m = random_model(BasisKind::cosine, false, 8);
  try {
    m.decision_values(Matrix::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    const std::string what = e.what();
    EXPECT_NE(what.find("4"), std::string::npos) << what;
    EXPECT_NE(what.find("3"), std::string::npos) << what;
  }
  auto short_coeffs = m;
  short_coeffs.coeffs.conservativeResize(3);
  EXPECT_ERROR_CODE(short_coeffs.validate(), ErrorCode::invalid_argument);
  EXPECT_ERROR_CODE(serialize_model(short_coeffs), ErrorCode::invalid_argument);
  m.scaling = fit_scaling(Matrix::Zero(2, 4), BasisKind::haar);
  EXPECT_ERROR_CODE(m.validate(), ErrorCode::invalid_argument);
}

}  // namespace
}  // namespace anovasvm
