#include "anovasvm/experiment.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "anovasvm/random.hpp"
#include "test_util.hpp"

namespace anovasvm {
namespace {

namespace fs = std::filesystem;

class QuietLog : public ::testing::Test {
protected:
  void SetUp() override {
    set_log_sink([this](LogLevel level, const std::string& m) {
      if (level == LogLevel::warning) warnings += m + "\n";
    });
  }
  void TearDown() override { set_log_sink(nullptr); }
  std::string warnings;
};

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("anovasvm_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PathPoint point(double lambda, double ca, std::optional<double> auc = std::nullopt) {
  PathPoint p;
  p.lambda = lambda;
  p.test.ca = ca;
  p.test.auc = auc;
  return p;
}

ProtocolSpec toy_protocol(ToyProblem which, BasisKind basis, std::size_t M, std::size_t runs) {
  ProtocolSpec spec;
  spec.source.toy = ToySpec{which, basis, M, 0, CosineNormalization::orthonormal};
  spec.source.toy_test_size = M;
  spec.source.scale = false;
  spec.features.basis = basis;
  spec.runs = runs;
  spec.seed = 11;
  return spec;
}

void expect_same_runs(const ProtocolResult& a, const ProtocolResult& b) {
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    ASSERT_EQ(a.runs[r].path.size(), b.runs[r].path.size());
    for (std::size_t i = 0; i < a.runs[r].path.size(); ++i) {
      EXPECT_EQ(a.runs[r].path[i].solve.coeffs, b.runs[r].path[i].solve.coeffs);
      EXPECT_EQ(a.runs[r].path[i].test.ca, b.runs[r].path[i].test.ca);
    }
    for (std::size_t i = 0; i < a.runs[r].refit_path.size(); ++i)
      EXPECT_EQ(a.runs[r].refit_path[i].solve.coeffs, b.runs[r].refit_path[i].solve.coeffs);
  }
  EXPECT_EQ(a.mean_ca, b.mean_ca);
  EXPECT_EQ(a.refit_mean_ca, b.refit_mean_ca);
}

TEST(LambdaGridTest, Parsing) {
  EXPECT_EQ(parse_lambda_grid("2^-1..2^-3,0"), (std::vector<double>{0.5, 0.25, 0.125, 0.0}));
  EXPECT_EQ(parse_lambda_grid("2^-3..2^-1"), (std::vector<double>{0.5, 0.25, 0.125}));
  EXPECT_EQ(parse_lambda_grid("0.01, 1, 0.01, 2^-2"), (std::vector<double>{1.0, 0.25, 0.01}));
  EXPECT_EQ(parse_lambda_grid("2^-10..2^-1").size(), 10u);
  EXPECT_ERROR_CODE(parse_lambda_grid(""), ErrorCode::config_error);
  EXPECT_ERROR_CODE(parse_lambda_grid("1..2"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(parse_lambda_grid("-1"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(parse_lambda_grid("abc"), ErrorCode::config_error);
  EXPECT_EQ(parse_int_list("6, 4"), (std::vector<int>{6, 4}));
  EXPECT_ERROR_CODE(parse_int_list("6,x"), ErrorCode::config_error);
}

TEST(ConfigTest, KeysAndValidation) {
  RunConfig c;
  c.set("basis", "haar");
  c.set("reg", "l1");
  c.set("bandwidths", "3,2");
  c.set("lambda-grid", "2^-1..2^-2");
  c.set("bandwidth.1+2", "4,4");
  c.set("train-ratio", "0.7");
  EXPECT_EQ(c.basis, BasisKind::haar);
  EXPECT_EQ(c.reg, RegKind::l1);
  EXPECT_EQ(c.per_order, (std::vector<int>{3, 2}));
  EXPECT_EQ(c.lambdas, (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(c.bandwidth_overrides.at("1+2"), (std::vector<int>{4, 4}));
  EXPECT_EQ(*c.train_ratio, 0.7);
  EXPECT_NO_THROW(c.validate());
  EXPECT_ERROR_CODE(c.set("no-such-key", "1"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(c.set("reg", "l3"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(c.set("runs", "0"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(c.set("train-ratio", "1.5"), ErrorCode::config_error);
  EXPECT_ERROR_CODE(c.set("bandwidth.1+x", "4"), ErrorCode::config_error);
  c.ds = 3;
  EXPECT_ERROR_CODE(c.validate(), ErrorCode::config_error);
}

TEST(ConfigTest, FileErrorsNameTheLine) {
  RunConfig c;
  std::istringstream good("# comment\nbasis = haar\n\nlambda = 2^-3\n");
  load_config(c, good, "cfg");
  EXPECT_EQ(c.basis, BasisKind::haar);
  EXPECT_EQ(c.lambdas, std::vector<double>{0.125});
  for (const std::string text : {"basis = haar\nreg = l1\nnot a pair\n", "seed = 1\nruns = 1\nwhat = 3\n"}) {
    std::istringstream in(text);
    try {
      load_config(c, in, "cfg");
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::config_error);
      EXPECT_NE(std::string(e.what()).find("cfg:3"), std::string::npos) << e.what();
    }
  }
  EXPECT_ERROR_CODE(load_config_file(c, "/nonexistent.cfg"), ErrorCode::io_error);
}

TEST(SelectionTest, TiesGoToLargerLambda) {
  std::vector<PathPoint> path{point(0.5, 90, 0.8), point(0.25, 95, 0.9), point(0.125, 95, 0.95), point(0.0, 80)};
  EXPECT_EQ(best_index(path), 1u);
  EXPECT_EQ(best_auc_index(path), 2u);
  std::vector<PathPoint> reversed(path.rbegin(), path.rend());
  EXPECT_EQ(reversed[best_index(reversed)].lambda, 0.25);
  EXPECT_ERROR_CODE(best_index({}), ErrorCode::invalid_argument);
}

TEST(SelectionTest, Evaluate) {
  Vector s(4), y(4);
  s << 1, -1, 2, -2;
  y << 1, -1, -1, -1;
  const auto e = evaluate(s, y);
  EXPECT_EQ(e.ca, 75.0);
  ASSERT_TRUE(e.auc);
  EXPECT_NEAR(*e.auc, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(evaluate(s, Vector::Ones(4)).auc);
}

TEST(FeatureTest, OverridesAndFamily) {
  FeatureSpec f;
  f.per_order = {6, 4};
  f.overrides["2"] = {4};
  const auto set = build_feature_set(f, 3);
  EXPECT_EQ(set.terms().size(), 7u);
  EXPECT_EQ(set.block_of(AnovaSubset{1}).length, 5u);
  EXPECT_EQ(set.block_of(AnovaSubset{2}).length, 3u);
  EXPECT_EQ(set.block_of(AnovaSubset{1, 2}).length, 9u);
  f.overrides["2"] = {4, 4};
  EXPECT_ERROR_CODE(build_feature_set(f, 3), ErrorCode::config_error);
  f.overrides.clear();
  f.per_order = {6};
  EXPECT_ERROR_CODE(build_feature_set(f, 3), ErrorCode::config_error);
}

TEST(ParallelTest, CoversAllIndicesAndRethrowsFirst) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  try {
    parallel_for(20, 3, [](std::size_t i) {
      if (i == 7 || i == 15) throw std::runtime_error("at " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "at 7");
  }
}

TEST_F(QuietLog, HugeLambdaPredictsOneClass) {
  auto spec = toy_protocol(ToyProblem::toy6d, BasisKind::cosine, 200, 2);
  spec.features.per_order = {4, 2};
  spec.reg = RegKind::l1;
  spec.lambdas = {1e9};
  const auto res = run_protocol(spec);
  for (std::size_t r = 0; r < res.runs.size(); ++r) {
    const auto& p = res.runs[r].path.front();
    EXPECT_EQ(p.solve.coeffs.cwiseAbs().maxCoeff(), 0.0);
    ToySpec test = *spec.source.toy;
    test.seed = derive_seed(spec.seed, 2 * r + 1);
    const auto data = generate(test);
    EXPECT_DOUBLE_EQ(p.test.ca, 100.0 * static_cast<double>(data.positives()) / static_cast<double>(data.size()));
  }
}

TEST_F(QuietLog, HaarReproducesTrainingLabels) {
  auto spec = toy_protocol(ToyProblem::toy1d, BasisKind::haar, 50, 3);
  spec.features.ds = 1;
  spec.features.per_order = {2};
  spec.lambdas = {1e-4};
  const auto res = run_protocol(spec);
  for (const auto& r : res.runs) {
    EXPECT_EQ(r.cardinality, 8u);
    EXPECT_EQ(r.path.front().train_ca, 100.0);
  }
}

TEST_F(QuietLog, JobsDoNotChangeResults) {
  auto spec = toy_protocol(ToyProblem::toy6d, BasisKind::haar, 150, 4);
  spec.features.per_order = {2, 1};
  spec.reg = RegKind::l1;
  spec.lambdas = {0.05, 0.01};
  spec.refit = RefitSpec{spec.features, RegKind::l1, {0.01}};
  spec.gsi_lambda = 0.01;
  const auto serial = run_protocol(spec);
  spec.jobs = 3;
  const auto threaded = run_protocol(spec);
  expect_same_runs(serial, threaded);
  const auto again = run_protocol(spec);
  expect_same_runs(threaded, again);
  for (const auto& r : serial.runs) {
    ASSERT_TRUE(r.active);
    EXPECT_TRUE(r.active->contains(AnovaSubset{}));
    EXPECT_EQ(r.refit_path.size(), 1u);
  }
  EXPECT_EQ(serial.refit_lambda_index(0.01), 0u);
  EXPECT_EQ(serial.lambda_index(0.05), 0u);
}

TEST(ActiveSetFileTest, RoundTrip) {
  const SubsetFamily family(6, {AnovaSubset{}, AnovaSubset{4}, AnovaSubset{6}, AnovaSubset{2, 3}});
  std::stringstream io;
  save_active_set(family, io);
  const auto back = load_active_set(io);
  EXPECT_EQ(back.dimension(), 6);
  EXPECT_EQ(back.subsets(), family.subsets());
  std::istringstream bad("anovasvm-active-set 2\n");
  EXPECT_ERROR_CODE(load_active_set(bad), ErrorCode::format_error);
  std::istringstream truncated("anovasvm-active-set 1\ndimension 6\nsubsets 3\nsubset {1}\n");
  EXPECT_ERROR_CODE(load_active_set(truncated), ErrorCode::format_error);
  EXPECT_ERROR_CODE(load_active_set("/nonexistent.active"), ErrorCode::io_error);
}

TEST(TableTest, Format) {
  std::ostringstream out;
  write_table(out, Table{"t", {"a", "b"}, {{"1", "x"}, {"2", "y"}}}, ';');
  EXPECT_EQ(out.str(), "a;b\n1;x\n2;y\n");
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), std::stod("0.3333333333"));
  EXPECT_EQ(suite_names().size(), 7u);
  EXPECT_ERROR_CODE(run_suite("nope", {}), ErrorCode::config_error);
}

TEST_F(QuietLog, FitWritesReportModelAndTrace) {
  const auto dir = temp_dir("fit");
  RunConfig c;
  c.toy = "toy1d";
  c.ds = 1;
  c.per_order = {6};
  c.samples = 60;
  c.lambdas = {0.1, 0.01};
  c.model = (dir / "m.asvm").string();
  c.trace = (dir / "trace.csv").string();
  std::ostringstream out;
  cmd_fit(c, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "run,lambda,train_ca,test_ca,auc,iterations,converged,stop,seconds");
  const auto m = load_model(c.model);
  EXPECT_EQ(m.coeffs.size(), 6);
  EXPECT_TRUE(m.provenance.reg.lambda == 0.1 || m.provenance.reg.lambda == 0.01);

  std::ifstream trace(c.trace);
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "run,lambda,iteration,objective");
  double prev = INFINITY;
  std::string prev_lambda;
  std::size_t rows = 0;
  while (std::getline(trace, line)) {
    std::stringstream ls(line);
    std::string run, lambda, it, obj;
    std::getline(ls, run, ',');
    std::getline(ls, lambda, ',');
    std::getline(ls, it, ',');
    std::getline(ls, obj, ',');
    if (lambda != prev_lambda) prev = INFINITY;
    EXPECT_LE(std::stod(obj), prev + 1e-12) << line;
    prev = std::stod(obj);
    prev_lambda = lambda;
    ++rows;
  }
  EXPECT_GT(rows, 2u);
  fs::remove_all(dir);
}

TEST_F(QuietLog, PredictRejectsWrongDimension) {
  const auto dir = temp_dir("predict");
  RunConfig c;
  c.toy = "toy1d";
  c.ds = 1;
  c.per_order = {4};
  c.samples = 30;
  c.model = (dir / "m.asvm").string();
  std::ostringstream sink;
  cmd_fit(c, sink);
  std::ofstream((dir / "two.csv").string()) << "1,0.1,0.2\n0,0.3,0.1\n";
  c.data = (dir / "two.csv").string();
  try {
    cmd_predict(c, sink);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    EXPECT_NE(std::string(e.what()).find("expects 1 features, data has 2"), std::string::npos) << e.what();
  }
  c.runs = 2;
  EXPECT_ERROR_CODE(cmd_fit(c, sink), ErrorCode::config_error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace anovasvm
