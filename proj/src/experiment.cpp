#include "anovasvm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "anovasvm/errors.hpp"
#include "anovasvm/random.hpp"

namespace anovasvm {

namespace fs = std::filesystem;

// logging

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

LogSink& log_sink() {
  static LogSink sink;
  return sink;
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard lock(log_mutex());
  log_sink() = std::move(sink);
}

void log_message(LogLevel level, const std::string& message) {
  std::lock_guard lock(log_mutex());
  if (log_sink()) {
    log_sink()(level, message);
    return;
  }
  std::cerr << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
}

namespace {

void info(const std::string& m) { log_message(LogLevel::info, m); }
void warn(const std::string& m) { log_message(LogLevel::warning, m); }

}  // namespace

// feature maps

FeatureSpec feature_spec(const RunConfig& config) {
  FeatureSpec spec;
  spec.basis = config.basis;
  spec.normalization = config.normalization;
  spec.ds = config.ds;
  spec.per_order = config.per_order;
  spec.overrides = config.bandwidth_overrides;
  return spec;
}

GroupedIndexSet build_feature_set(const FeatureSpec& spec, const SubsetFamily& family) {
  Bandwidths bw;
  bw.reserve(family.size());
  for (const auto& u : family.subsets()) {
    if (const auto it = spec.overrides.find(u.to_string()); it != spec.overrides.end()) {
      if (it->second.size() != u.size())
        fail(ErrorCode::config_error, "bandwidth for subset " + u.to_string() + " needs " +
                                          std::to_string(u.size()) + " entries");
      bw.push_back(it->second);
      continue;
    }
    if (u.size() > spec.per_order.size())
      fail(ErrorCode::config_error, "no bandwidth for subsets of order " + std::to_string(u.size()) + " (subset " +
                                        u.to_string() + ")");
    bw.emplace_back(u.size(), u.empty() ? 0 : spec.per_order[u.size() - 1]);
  }
  return build_index_set(spec.basis, family, bw);
}

GroupedIndexSet build_feature_set(const FeatureSpec& spec, int dimension) {
  return build_feature_set(spec, enumerate_subsets(dimension, std::min(spec.ds, dimension)));
}

// fitting along a lambda path

Evaluation evaluate(const Vector& scores, const Vector& labels) {
  Evaluation e;
  e.ca = 100.0 * classification_accuracy(labels, predict_labels(scores));
  const auto positives = (labels.array() > 0).count();
  if (positives > 0 && positives < labels.size()) e.auc = roc_auc(scores, labels).auc;
  return e;
}

std::vector<PathPoint> fit_path(const FeatureTransform& train, const Vector& train_labels,
                                const FeatureTransform& test, const Vector& test_labels, RegKind reg,
                                const std::vector<double>& lambdas, const SolveConfig& solve_cfg) {
  if (lambdas.empty()) fail(ErrorCode::config_error, "lambda grid is empty");
  std::vector<PathPoint> path;
  path.reserve(lambdas.size());
  for (double lambda : lambdas) {
    PathPoint p;
    p.lambda = lambda;
    const auto t0 = std::chrono::steady_clock::now();
    p.solve = solve(train, train_labels, {reg, lambda}, solve_cfg);
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    p.train_ca = 100.0 * classification_accuracy(train_labels, predict_labels(train.apply(p.solve.coeffs)));
    p.test = evaluate(test.apply(p.solve.coeffs), test_labels);
    path.push_back(std::move(p));
  }
  return path;
}

namespace {

// strictly better wins; on a tie the larger lambda wins
template <typename Key>
std::size_t best_by(const std::vector<PathPoint>& path, Key key) {
  if (path.empty()) fail(ErrorCode::invalid_argument, "empty lambda path");
  std::size_t best = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double a = key(path[i]), b = key(path[best]);
    if (a > b || (a == b && path[i].lambda > path[best].lambda)) best = i;
  }
  return best;
}

}  // namespace

std::size_t best_index(const std::vector<PathPoint>& path) {
  return best_by(path, [](const PathPoint& p) { return p.test.ca; });
}

std::size_t best_auc_index(const std::vector<PathPoint>& path) {
  return best_by(path, [](const PathPoint& p) { return p.test.auc.value_or(-1.0); });
}

// protocol

RunData make_run_data(const DataSource& source, BasisKind basis, std::uint64_t seed, std::size_t run) {
  RunData rd;
  if (source.toy) {
    ToySpec spec = *source.toy;
    spec.seed = derive_seed(seed, 2 * run);
    rd.train = generate(spec);
    spec.M = source.toy_test_size ? source.toy_test_size : source.toy->M;
    spec.seed = derive_seed(seed, 2 * run + 1);
    rd.test = generate(spec);
    return rd;
  }
  if (!source.data) fail(ErrorCode::config_error, "no training data given");
  if (source.test_data) {
    rd.train = *source.data;
    rd.test = *source.test_data;
    if (rd.test.dimension() != rd.train.dimension())
      fail(ErrorCode::config_error, "test data has " + std::to_string(rd.test.dimension()) +
                                        " features, training data has " + std::to_string(rd.train.dimension()));
  } else if (source.train_count || source.train_ratio) {
    const auto count = source.train_count ? *source.train_count
                                          : train_count_for_ratio(source.data->size(), *source.train_ratio);
    auto s = split(*source.data, count, derive_seed(seed, run));
    rd.train = std::move(s.train);
    rd.test = std::move(s.test);
  } else {
    rd.train = *source.data;
    rd.test = *source.data;
  }
  if (source.scale) {
    rd.scaling = fit_scaling(rd.train, basis);
    rd.train = apply_scaling(*rd.scaling, rd.train);
    rd.test = apply_scaling(*rd.scaling, rd.test, &rd.clamped);
  }
  return rd;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::size_t find_lambda(const std::vector<double>& grid, double lambda) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] == lambda) return i;
  fail(ErrorCode::not_found, "lambda " + format_number(lambda) + " is not on the grid");
}

Model make_model(const GroupedIndexSet& set, const FeatureSpec& features, const PathPoint& p, RegKind reg,
                 const std::optional<ScalingRecord>& scaling, std::uint64_t seed) {
  Model m;
  m.set = set;
  m.normalization = features.normalization;
  m.coeffs = p.solve.coeffs;
  m.scaling = scaling;
  m.provenance.seed = seed;
  m.provenance.reg = {reg, p.lambda};
  m.provenance.iterations = p.solve.iterations;
  m.provenance.objective = p.solve.objective;
  m.provenance.converged = p.solve.converged;
  m.provenance.stop = p.solve.reason;
  return m;
}

void average_path(const std::vector<RunOutcome>& runs, bool refit, std::vector<double>& ca,
                  std::vector<double>& auc, std::size_t n) {
  ca.assign(n, 0.0);
  auc.assign(n, 0.0);
  std::vector<std::size_t> auc_count(n, 0);
  for (const auto& r : runs) {
    const auto& path = refit ? r.refit_path : r.path;
    for (std::size_t i = 0; i < n; ++i) {
      ca[i] += path[i].test.ca;
      if (path[i].test.auc) {
        auc[i] += *path[i].test.auc;
        ++auc_count[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    ca[i] /= static_cast<double>(runs.size());
    auc[i] = auc_count[i] ? auc[i] / static_cast<double>(auc_count[i]) : std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::size_t ProtocolResult::count_active(const SubsetFamily& expected) const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [&](const RunOutcome& r) {
    return r.active && r.active->subsets() == expected.subsets();
  }));
}

std::size_t ProtocolResult::lambda_index(double lambda) const { return find_lambda(lambdas, lambda); }

std::size_t ProtocolResult::refit_lambda_index(double lambda) const { return find_lambda(refit_lambdas, lambda); }

ProtocolResult run_protocol(const ProtocolSpec& spec) {
  if (spec.runs < 1) fail(ErrorCode::config_error, "runs must be >= 1");
  if (spec.lambdas.empty()) fail(ErrorCode::config_error, "lambda grid is empty");
  if (spec.refit && spec.refit->lambdas.empty()) fail(ErrorCode::config_error, "refit lambda grid is empty");
  if (spec.gsi_lambda) find_lambda(spec.lambdas, *spec.gsi_lambda);
  const bool analyse = spec.analyse || spec.refit.has_value();

  ProtocolResult result;
  result.lambdas = spec.lambdas;
  result.runs.resize(spec.runs);

  parallel_for(spec.runs, spec.jobs, [&](std::size_t run) {
    RunOutcome& out = result.runs[run];
    out.run = run;
    const RunData rd = make_run_data(spec.source, spec.features.basis, spec.seed, run);
    const SubsetFamily family =
        spec.family ? *spec.family : enumerate_subsets(rd.train.dimension(), std::min(spec.features.ds, rd.train.dimension()));
    if (family.dimension() != rd.train.dimension())
      fail(ErrorCode::config_error, "feature family has dimension " + std::to_string(family.dimension()) +
                                        ", data has " + std::to_string(rd.train.dimension()));
    const auto set = build_feature_set(spec.features, family);
    out.cardinality = set.cardinality();
    out.clamped = rd.clamped;
    const FeatureTransform train(rd.train.X, set, spec.features.normalization);
    const FeatureTransform test(rd.test.X, set, spec.features.normalization);
    out.path = fit_path(train, rd.train.y, test, rd.test.y, spec.reg, spec.lambdas, spec.solve);
    out.best = best_index(out.path);
    out.best_auc = best_auc_index(out.path);
    if (spec.keep_models)
      out.model = make_model(set, spec.features, out.path[out.best], spec.reg, rd.scaling, derive_seed(spec.seed, run));
    if (!analyse) return;

    const auto at = spec.gsi_lambda ? find_lambda(spec.lambdas, *spec.gsi_lambda) : out.best;
    out.gsi = gsi(set, out.path[at].solve.coeffs);
    out.active = active_set(*out.gsi, spec.eps);
    if (!spec.refit) return;
    const auto refit_set = build_feature_set(spec.refit->features, *out.active);
    out.refit_cardinality = refit_set.cardinality();
    const FeatureTransform rtrain(rd.train.X, refit_set, spec.refit->features.normalization);
    const FeatureTransform rtest(rd.test.X, refit_set, spec.refit->features.normalization);
    out.refit_path =
        fit_path(rtrain, rd.train.y, rtest, rd.test.y, spec.refit->reg, spec.refit->lambdas, spec.solve);
  });

  average_path(result.runs, false, result.mean_ca, result.mean_auc, spec.lambdas.size());
  double best_ca = 0, best_auc = 0;
  std::size_t auc_runs = 0;
  for (const auto& r : result.runs) {
    best_ca += r.path[r.best].test.ca;
    if (const auto& a = r.path[r.best_auc].test.auc) {
      best_auc += *a;
      ++auc_runs;
    }
  }
  result.mean_best_ca = best_ca / static_cast<double>(spec.runs);
  result.mean_best_auc = auc_runs ? best_auc / static_cast<double>(auc_runs) : std::numeric_limits<double>::quiet_NaN();
  if (spec.refit) {
    result.refit_lambdas = spec.refit->lambdas;
    average_path(result.runs, true, result.refit_mean_ca, result.refit_mean_auc, spec.refit->lambdas.size());
  }
  return result;
}

// tables

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 10);
  return std::string(buf, r.ptr);
}

void write_table(std::ostream& out, const Table& table, char delimiter) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? std::string(1, delimiter) : "") << cells[i];
    out << '\n';
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
}

namespace {

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::vector<double> pow2_grid(int from, int to, bool with_zero) {
  std::vector<double> g;
  for (int e = from; e >= to; --e) g.push_back(std::ldexp(1.0, e));
  if (with_zero) g.push_back(0.0);
  return g;
}

std::string lambda_text(double lambda) {
  if (lambda == 0) return "0";
  int e = 0;
  const double m = std::frexp(lambda, &e);
  if (m == 0.5) return "2^" + std::to_string(e - 1);
  return format_number(lambda);
}

std::string order_text(const std::vector<int>& per_order) {
  std::string s;
  for (std::size_t i = 0; i < per_order.size(); ++i) s += (i ? "/" : "") + std::to_string(per_order[i]);
  return s;
}

// mean rho per subset over all analysed runs, ranked
std::vector<std::pair<AnovaSubset, double>> mean_gsi(const ProtocolResult& r) {
  std::map<AnovaSubset, double> sum;
  std::size_t n = 0;
  for (const auto& run : r.runs) {
    if (!run.gsi) continue;
    ++n;
    for (const auto& e : run.gsi->entries) sum[e.subset] += e.rho;
  }
  std::vector<std::pair<AnovaSubset, double>> out(sum.begin(), sum.end());
  for (auto& [u, v] : out) v /= static_cast<double>(std::max<std::size_t>(n, 1));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

struct ToyConfig {
  BasisKind basis;
  RegKind reg;
  std::size_t train;
  std::size_t test;
  FeatureSpec features;
  std::optional<FeatureSpec> refit;
};

ProtocolSpec toy_spec(ToyProblem which, const ToyConfig& c, const std::vector<double>& lambdas,
                      const SuiteOptions& o, std::size_t runs, std::uint64_t seed) {
  ProtocolSpec p;
  p.source.toy = ToySpec{which, c.basis, c.train, 0, c.features.normalization};
  p.source.toy_test_size = c.test;
  p.source.scale = false;
  p.features = c.features;
  p.reg = c.reg;
  p.lambdas = lambdas;
  p.solve = o.solve;
  p.runs = runs;
  p.seed = seed;
  p.jobs = o.jobs;
  return p;
}

FeatureSpec features_of(BasisKind basis, int ds, std::vector<int> per_order) {
  FeatureSpec f;
  f.basis = basis;
  f.ds = ds;
  f.per_order = std::move(per_order);
  return f;
}

std::vector<Table> toy1d_suite(const SuiteOptions& o) {
  const std::size_t runs = o.runs.value_or(100);
  Table t{"toy1d", {"basis", "reg", "lambda", "runs", "mean_ca"}, {}};
  std::size_t k = 0;
  for (BasisKind b : {BasisKind::cosine, BasisKind::haar})
    for (RegKind r : {RegKind::l1, RegKind::l2}) {
      ToyConfig c{b, r, 50, 100, features_of(b, 1, {b == BasisKind::cosine ? 6 : 2}), std::nullopt};
      const auto res = run_protocol(toy_spec(ToyProblem::toy1d, c, {0.01}, o, runs, derive_seed(o.seed, k++)));
      t.rows.push_back({basis_kind_name(b), reg_kind_name(r), "0.01", num(runs), num(res.mean_ca[0])});
      info("toy1d " + std::string(basis_kind_name(b)) + " " + reg_kind_name(r) + ": mean CA " + num(res.mean_ca[0]));
    }
  return {t};
}

std::vector<Table> synthetic_suite(const std::string& name, ToyProblem which, std::vector<ToyConfig> configs,
                                   const std::vector<double>& lambdas, const std::vector<double>& refit_lambdas,
                                   const SubsetFamily& expected, std::size_t default_runs, const SuiteOptions& o) {
  const std::size_t runs = o.runs.value_or(default_runs);
  Table curve{name + "_curve", {"basis", "reg", "bandwidths", "lambda", "mean_ca"}, {}};
  Table refit{name + "_refit_curve", {"basis", "reg", "bandwidths", "coefficients", "lambda", "mean_ca"}, {}};
  Table summary{name + "_summary",
                {"basis", "reg", "bandwidths", "train", "coefficients", "runs", "best_lambda", "best_mean_ca",
                 "active_set_recovered", "refit_best_lambda", "refit_best_mean_ca"},
                {}};
  Table gsi_table{name + "_gsi", {"basis", "reg", "bandwidths", "subset", "mean_rho"}, {}};
  std::size_t k = 0;
  for (const auto& c : configs) {
    auto p = toy_spec(which, c, lambdas, o, runs, derive_seed(o.seed, k++));
    p.analyse = true;
    if (c.refit) p.refit = RefitSpec{*c.refit, c.reg, refit_lambdas};
    const auto res = run_protocol(p);
    const std::string b = basis_kind_name(c.basis), r = reg_kind_name(c.reg), bw = order_text(c.features.per_order);
    for (std::size_t i = 0; i < lambdas.size(); ++i) curve.rows.push_back({b, r, bw, lambda_text(lambdas[i]), num(res.mean_ca[i])});
    const auto best = static_cast<std::size_t>(std::max_element(res.mean_ca.begin(), res.mean_ca.end()) - res.mean_ca.begin());
    std::string refit_best = "", refit_ca = "";
    if (c.refit) {
      const auto rb = static_cast<std::size_t>(std::max_element(res.refit_mean_ca.begin(), res.refit_mean_ca.end()) -
                                               res.refit_mean_ca.begin());
      refit_best = lambda_text(refit_lambdas[rb]);
      refit_ca = num(res.refit_mean_ca[rb]);
      const auto n_refit = res.runs.front().refit_cardinality;
      for (std::size_t i = 0; i < refit_lambdas.size(); ++i)
        refit.rows.push_back({b, r, order_text(c.refit->per_order), num(n_refit), lambda_text(refit_lambdas[i]),
                              num(res.refit_mean_ca[i])});
    }
    summary.rows.push_back({b, r, bw, num(c.train), num(res.runs.front().cardinality), num(runs),
                            lambda_text(lambdas[best]), num(res.mean_ca[best]), num(res.count_active(expected)),
                            refit_best, refit_ca});
    for (const auto& [u, rho] : mean_gsi(res)) gsi_table.rows.push_back({b, r, bw, u.to_string(), num(rho)});
    info(name + " " + b + " " + r + " N=" + bw + ": best mean CA " + num(res.mean_ca[best]) + " at lambda " +
         lambda_text(lambdas[best]));
  }
  std::vector<Table> out{summary, curve};
  if (!refit.rows.empty()) out.push_back(refit);
  out.push_back(gsi_table);
  return out;
}

std::vector<Table> toy6d_suite(const SuiteOptions& o) {
  std::vector<ToyConfig> configs;
  for (RegKind r : {RegKind::l1, RegKind::l2}) {
    const auto f = features_of(BasisKind::cosine, 2, {6, 4});
    configs.push_back({BasisKind::cosine, r, 1000, 1000, f, f});
  }
  for (RegKind r : {RegKind::l1, RegKind::l2}) {
    const auto f = features_of(BasisKind::haar, 2, {3, 3});
    configs.push_back({BasisKind::haar, r, 5000, 5000, f, f});
  }
  const SubsetFamily expected(6, {AnovaSubset{}, AnovaSubset{4}, AnovaSubset{6}, AnovaSubset{2, 3}});
  return synthetic_suite("toy6d", ToyProblem::toy6d, configs, pow2_grid(-1, -10, false), pow2_grid(-1, -12, false),
                         expected, 100, o);
}

std::vector<Table> friedman_suite(const SuiteOptions& o) {
  std::vector<ToyConfig> configs;
  for (RegKind r : {RegKind::l1, RegKind::l2})
    for (int n2 : {2, 4, 6}) {
      const auto f = features_of(BasisKind::cosine, 2, {6, n2});
      configs.push_back({BasisKind::cosine, r, 1000, 1000, f, f});
    }
  for (RegKind r : {RegKind::l1, RegKind::l2})
    for (int n2 : {1, 2, 3})
      configs.push_back({BasisKind::haar, r, 5000, 5000, features_of(BasisKind::haar, 2, {3, n2}),
                         features_of(BasisKind::haar, 2, {4, 3})});
  const SubsetFamily expected(10, {AnovaSubset{}, AnovaSubset{1}, AnovaSubset{2}, AnovaSubset{3}, AnovaSubset{4},
                                   AnovaSubset{5}, AnovaSubset{1, 2}});
  auto tables = synthetic_suite("friedman10d", ToyProblem::friedman10d, configs, pow2_grid(-2, -12, false),
                                pow2_grid(-2, -12, false), expected, 10, o);
  Table constants{"friedman10d_constants", {"quantity", "value"}, {}};
  constants.rows.push_back({"mean", num(friedman1_mean())});
  constants.rows.push_back({"sine_integral", num(friedman1_sine_constant())});
  Table importance{"friedman10d_importance", {"subset", "percent"}, {}};
  const auto imp = importance_experiment(1000000, derive_seed(o.seed, 1000));
  for (const auto& e : imp.entries) importance.rows.push_back({e.subset.to_string(), num(e.percent)});
  importance.rows.push_back({"positives", num(100.0 * static_cast<double>(imp.positives) / static_cast<double>(imp.samples))});
  tables.push_back(constants);
  tables.push_back(importance);
  return tables;
}

struct RealSuite {
  std::string name;
  int dimension;
  std::size_t train;
  std::optional<std::size_t> test;
  int n1;
  std::vector<int> n2s;
  std::vector<double> lambdas;
  std::size_t runs;
  std::size_t pool;
  // one extra fit for the sensitivity analysis
  std::size_t gsi_train;
  std::optional<std::size_t> gsi_test;
  std::vector<int> gsi_order;
  std::optional<double> gsi_lambda;
  bool gsi_refit;
};

Dataset cap_rows(const Dataset& d, std::size_t rows) {
  if (d.size() <= rows) return d;
  std::vector<std::size_t> idx(rows);
  for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
  return d.subset(idx);
}

// train_count rows for training and (optionally) a capped test part
RunData real_run(const Dataset& data, std::size_t train, std::optional<std::size_t> test, std::uint64_t seed,
                 std::size_t run) {
  if (train >= data.size())
    fail(ErrorCode::config_error, "data set has " + std::to_string(data.size()) + " rows, need more than " +
                                      std::to_string(train));
  auto s = split(data, train, derive_seed(seed, run));
  RunData rd;
  rd.train = std::move(s.train);
  rd.test = test ? cap_rows(s.test, *test) : std::move(s.test);
  rd.scaling = fit_scaling(rd.train, BasisKind::cosine);
  rd.train = apply_scaling(*rd.scaling, rd.train);
  rd.test = apply_scaling(*rd.scaling, rd.test);
  return rd;
}

std::vector<Table> real_suite(const RealSuite& s, const SuiteOptions& o) {
  const std::string path = o.data.empty() ? "data/" + s.name + ".csv" : o.data;
  if (!fs::exists(path))
    fail(ErrorCode::config_error, "suite " + s.name + " needs its data file at '" + path +
                                      "' (label in the first column; pass --data to use another path)");
  DelimitedOptions opts;
  opts.max_rows = o.max_rows ? o.max_rows : s.pool;
  const Dataset data = read_dataset(path, opts);
  if (data.dimension() != s.dimension)
    fail(ErrorCode::config_error, "suite " + s.name + " expects " + std::to_string(s.dimension) +
                                      " features, '" + path + "' has " + std::to_string(data.dimension()));
  info(s.name + ": " + std::to_string(data.size()) + " rows from " + path);
  const std::size_t runs = o.runs.value_or(s.runs);

  Table summary{s.name + "_summary", {"n1", "n2", "coefficients", "runs", "mean_best_ca", "mean_best_auc"}, {}};
  Table per_run{s.name + "_runs", {"n2", "run", "best_lambda", "best_ca", "best_auc_lambda", "best_auc"}, {}};
  Table curve{s.name + "_curve", {"n2", "lambda", "mean_ca", "mean_auc"}, {}};
  for (int n2 : s.n2s) {
    const auto features = features_of(BasisKind::cosine, 2, {s.n1, n2});
    std::vector<RunOutcome> outcomes(runs);
    parallel_for(runs, o.jobs, [&](std::size_t run) {
      const auto rd = real_run(data, s.train, s.test, o.seed, run);
      const auto set = build_feature_set(features, s.dimension);
      const FeatureTransform train(rd.train.X, set), test(rd.test.X, set);
      auto& out = outcomes[run];
      out.run = run;
      out.cardinality = set.cardinality();
      out.path = fit_path(train, rd.train.y, test, rd.test.y, RegKind::l1, s.lambdas, o.solve);
      out.best = best_index(out.path);
      out.best_auc = best_auc_index(out.path);
    });
    double ca = 0, auc = 0;
    for (const auto& r : outcomes) {
      ca += r.path[r.best].test.ca;
      auc += r.path[r.best_auc].test.auc.value_or(std::numeric_limits<double>::quiet_NaN());
      per_run.rows.push_back({num(static_cast<std::size_t>(n2)), num(r.run), lambda_text(r.path[r.best].lambda),
                              num(r.path[r.best].test.ca), lambda_text(r.path[r.best_auc].lambda),
                              num(r.path[r.best_auc].test.auc.value_or(std::numeric_limits<double>::quiet_NaN()))});
    }
    std::vector<double> mca, mauc;
    average_path(outcomes, false, mca, mauc, s.lambdas.size());
    for (std::size_t i = 0; i < s.lambdas.size(); ++i)
      curve.rows.push_back({num(static_cast<std::size_t>(n2)), lambda_text(s.lambdas[i]), num(mca[i]), num(mauc[i])});
    const double n = static_cast<double>(runs);
    summary.rows.push_back({num(static_cast<std::size_t>(s.n1)), num(static_cast<std::size_t>(n2)),
                            num(outcomes.front().cardinality), num(runs), num(ca / n), num(auc / n)});
    info(s.name + " N=(" + std::to_string(s.n1) + "," + std::to_string(n2) + "): mean best CA " + num(ca / n) +
         ", mean best AUC " + num(auc / n));
  }

  // sensitivity analysis on a single larger split
  Table gsi_fit{s.name + "_gsi_fit", {"stage", "coefficients", "lambda", "ca", "auc"}, {}};
  Table ranking{s.name + "_gsi", {"rank", "subset", "rho"}, {}};
  {
    const auto rd = real_run(data, s.gsi_train, s.gsi_test, derive_seed(o.seed, 7), 0);
    const auto features = features_of(BasisKind::cosine, 2, s.gsi_order);
    const auto set = build_feature_set(features, s.dimension);
    const FeatureTransform train(rd.train.X, set), test(rd.test.X, set);
    const std::vector<double> grid = s.gsi_lambda ? std::vector<double>{*s.gsi_lambda} : s.lambdas;
    const auto path = fit_path(train, rd.train.y, test, rd.test.y, RegKind::l1, grid, o.solve);
    const auto& best = path[best_index(path)];
    gsi_fit.rows.push_back({"full", num(set.cardinality()), lambda_text(best.lambda), num(best.test.ca),
                            num(best.test.auc.value_or(std::numeric_limits<double>::quiet_NaN()))});
    const auto report = gsi(set, best.solve.coeffs);
    for (std::size_t i = 0; i < report.entries.size(); ++i)
      ranking.rows.push_back({num(i + 1), report.entries[i].subset.to_string(), num(report.entries[i].rho)});
    if (s.gsi_refit) {
      const auto active = active_set(report, 0.01);
      const auto rset = build_feature_set(features, active);
      const FeatureTransform rtrain(rd.train.X, rset), rtest(rd.test.X, rset);
      const auto rpath = fit_path(rtrain, rd.train.y, rtest, rd.test.y, RegKind::l1, grid, o.solve);
      const auto& rb = rpath[best_index(rpath)];
      gsi_fit.rows.push_back({"active_set", num(rset.cardinality()), lambda_text(rb.lambda), num(rb.test.ca),
                              num(rb.test.auc.value_or(std::numeric_limits<double>::quiet_NaN()))});
    }
  }
  return {summary, curve, per_run, gsi_fit, ranking};
}

const std::vector<RealSuite>& real_suites() {
  static const std::vector<RealSuite> suites = {
      {"wbc", 9, 456, std::nullopt, 4, {2, 4, 6}, pow2_grid(-1, -10, true), 100, 0, 614, std::nullopt, {4, 4},
       std::nullopt, false},
      {"pid", 8, 538, std::nullopt, 4, {2, 4, 6}, pow2_grid(-1, -10, true), 100, 0, 691, std::nullopt, {4, 2},
       std::nullopt, false},
      {"susy", 18, 10000, 10000, 4, {2, 4, 6}, pow2_grid(-1, -5, true), 10, 1000000, 10000, 10000, {4, 4},
       std::ldexp(1.0, -4), true},
      {"higgs", 28, 50000, 50000, 4, {2, 4, 6}, pow2_grid(-5, -10, true), 10, 1000000, 50000, 50000, {4, 6},
       std::ldexp(1.0, -9), true},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"toy1d", "toy6d", "friedman10d", "wbc", "pid", "susy", "higgs"};
  return names;
}

std::vector<Table> run_suite(const std::string& name, const SuiteOptions& options) {
  if (name == "toy1d") return toy1d_suite(options);
  if (name == "toy6d") return toy6d_suite(options);
  if (name == "friedman10d") return friedman_suite(options);
  for (const auto& s : real_suites())
    if (s.name == name) return real_suite(s, options);
  std::string known;
  for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorCode::config_error, "unknown suite '" + name + "' (known: " + known + ")");
}

// active-set files

namespace {
constexpr const char* kActiveSetMagic = "anovasvm-active-set";
}

void save_active_set(const SubsetFamily& family, std::ostream& out) {
  out << kActiveSetMagic << " 1\n";
  out << "dimension " << family.dimension() << '\n';
  out << "subsets " << family.size() << '\n';
  for (const auto& u : family.subsets()) out << "subset " << u.to_string() << '\n';
  if (!out) fail(ErrorCode::io_error, "failed to write active set");
}

void save_active_set(const SubsetFamily& family, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  save_active_set(family, out);
}

SubsetFamily load_active_set(std::istream& in) {
  auto field = [&](const char* key) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::format_error, std::string("active set: missing '") + key + "' line");
    std::istringstream ls(line);
    std::string k, v, extra;
    ls >> k >> v;
    if (k != key || v.empty() || (ls >> extra))
      fail(ErrorCode::format_error, std::string("active set: expected '") + key + " <value>', found '" + line + "'");
    return v;
  };
  const auto version = field(kActiveSetMagic);
  if (version != "1") fail(ErrorCode::format_error, "active set: unsupported version " + version);
  auto to_size = [](const std::string& text, const char* what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      fail(ErrorCode::format_error, std::string("active set: bad ") + what + " '" + text + "'");
    return v;
  };
  const auto d = to_size(field("dimension"), "dimension");
  const auto n = to_size(field("subsets"), "subset count");
  std::vector<AnovaSubset> subsets;
  for (std::size_t i = 0; i < n; ++i) {
    const auto text = field("subset");
    try {
      subsets.push_back(AnovaSubset::parse(text));
    } catch (const Error& e) {
      fail(ErrorCode::format_error, std::string("active set: ") + e.what());
    }
  }
  std::string rest;
  while (std::getline(in, rest))
    if (!rest.empty()) fail(ErrorCode::format_error, "active set: trailing content '" + rest + "'");
  try {
    return SubsetFamily(static_cast<int>(d), std::move(subsets));
  } catch (const Error& e) {
    fail(ErrorCode::config_error, std::string("active set: ") + e.what());
  }
}

SubsetFamily load_active_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open active set '" + path + "'");
  return load_active_set(in);
}

// subcommands

Dataset load_dataset(const RunConfig& config, const std::string& path) {
  if (path != "-" && !fs::exists(path)) fail(ErrorCode::io_error, "data file '" + path + "' does not exist");
  if (config.format == "libsvm") return read_libsvm(path);
  if (config.format == "csv") return read_delimited(path, config.delimited);
  return read_dataset(path, config.delimited);
}

namespace {

// writes to config.out when set, otherwise to the given stream
template <typename Fn>
void emit(const std::string& target, std::ostream& fallback, Fn&& write) {
  if (target.empty() || target == "-") {
    write(fallback);
    return;
  }
  std::ofstream f(target);
  if (!f) fail(ErrorCode::io_error, "cannot open '" + target + "' for writing");
  write(f);
  f.flush();
  if (!f) fail(ErrorCode::io_error, "failed to write '" + target + "'");
}

bool is_directory_target(const std::string& target) {
  return !target.empty() && (target.back() == '/' || fs::is_directory(target));
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::io_error, "cannot create output directory '" + dir + "'");
}

DataSource source_from(const RunConfig& config) {
  DataSource src;
  if (config.data.empty()) {
    src.toy = ToySpec{parse_toy_problem(config.toy), config.basis, config.samples, 0, config.normalization};
    src.toy_test_size = config.test_samples.value_or(config.samples);
    src.scale = false;
    return src;
  }
  src.data = load_dataset(config, config.data);
  if (!config.test_data.empty()) {
    src.test_data = load_dataset(config, config.test_data);
    // libsvm files only know the largest index they mention
    if (src.test_data->dimension() < src.data->dimension() && config.format != "csv") {
      src.test_data->X.conservativeResize(Eigen::NoChange, src.data->dimension());
      src.test_data->X.rightCols(src.data->dimension() - src.test_data->dimension()).setZero();
    }
  }
  src.train_count = config.train_count;
  src.train_ratio = config.train_ratio;
  if (!src.test_data && !src.train_count && !src.train_ratio)
    warn("no test data or split given; test metrics are computed on the training data");
  src.scale = config.scale;
  return src;
}

void fit_and_report(const RunConfig& config, const FeatureSpec& features, std::optional<SubsetFamily> family,
                    std::ostream& out) {
  ProtocolSpec spec;
  spec.source = source_from(config);
  spec.features = features;
  spec.family = std::move(family);
  spec.reg = config.reg;
  spec.lambdas = config.lambdas;
  spec.solve = config.solve;
  spec.runs = config.runs.value_or(1);
  spec.seed = config.seed;
  spec.jobs = config.jobs;
  spec.keep_models = true;
  if (!config.model.empty() && spec.runs > 1)
    fail(ErrorCode::config_error, "'model' keeps a single model; use out=<directory> to keep one model per run");

  const auto result = run_protocol(spec);

  Table report{"report",
               {"run", "lambda", "train_ca", "test_ca", "auc", "iterations", "converged", "stop", "seconds"},
               {}};
  for (const auto& r : result.runs)
    for (const auto& p : r.path)
      report.rows.push_back({num(r.run + 1), format_number(p.lambda), num(p.train_ca), num(p.test.ca),
                             num(p.test.auc.value_or(std::numeric_limits<double>::quiet_NaN())),
                             num(p.solve.iterations), p.solve.converged ? "1" : "0", stop_reason_name(p.solve.reason),
                             num(p.seconds)});

  for (const auto& r : result.runs) {
    const auto& b = r.path[r.best];
    info("run " + std::to_string(r.run + 1) + ": " + std::to_string(r.cardinality) + " coefficients, best lambda " +
         format_number(b.lambda) + ", test CA " + num(b.test.ca) +
         (b.test.auc ? ", AUC " + num(*b.test.auc) : std::string()));
    if (r.clamped)
      warn("run " + std::to_string(r.run + 1) + ": " + std::to_string(r.clamped) +
           " test values fell outside the training range and were clamped");
    for (const auto& p : r.path)
      if (!p.solve.converged)
        warn("run " + std::to_string(r.run + 1) + ", lambda " + format_number(p.lambda) + ": stopped without converging (" +
             stop_reason_name(p.solve.reason) + ")");
  }
  if (result.runs.size() > 1)
    info("mean best test CA " + num(result.mean_best_ca) + " over " + std::to_string(result.runs.size()) + " runs");

  if (is_directory_target(config.out)) {
    ensure_directory(config.out);
    const fs::path dir(config.out);
    emit((dir / "report.csv").string(), out, [&](std::ostream& o) { write_table(o, report); });
    for (const auto& r : result.runs) save_model(*r.model, (dir / ("model-run" + std::to_string(r.run + 1) + ".asvm")).string());
  } else {
    emit(config.out, out, [&](std::ostream& o) { write_table(o, report); });
  }
  if (!config.model.empty()) save_model(*result.runs.front().model, config.model);
  if (!config.trace.empty()) {
    Table trace{"trace", {"run", "lambda", "iteration", "objective"}, {}};
    for (const auto& r : result.runs)
      for (const auto& p : r.path)
        for (std::size_t i = 0; i < p.solve.trace.size(); ++i)
          trace.rows.push_back({num(r.run + 1), format_number(p.lambda), num(i), num(p.solve.trace[i])});
    emit(config.trace, out, [&](std::ostream& o) { write_table(o, trace); });
  }
}

Model require_model(const RunConfig& config) {
  if (config.model.empty()) fail(ErrorCode::config_error, "no model file given (model=<path>)");
  return load_model(config.model);
}

}  // namespace

void cmd_fit(const RunConfig& config, std::ostream& out) {
  config.validate();
  fit_and_report(config, feature_spec(config), std::nullopt, out);
}

void cmd_predict(const RunConfig& config, std::ostream& out) {
  const Model model = require_model(config);
  if (config.data.empty()) fail(ErrorCode::config_error, "no data file given (data=<path>)");
  Dataset data = load_dataset(config, config.data);
  if (data.dimension() < model.dimension() && config.format != "csv" &&
      (config.format == "libsvm" || config.data.ends_with(".svm") || config.data.ends_with(".libsvm"))) {
    const auto d0 = data.dimension();
    data.X.conservativeResize(Eigen::NoChange, model.dimension());
    data.X.rightCols(model.dimension() - d0).setZero();
  }
  std::size_t clamped = 0;
  const Vector scores = model.decision_values(data.X, &clamped);
  if (clamped) warn(std::to_string(clamped) + " feature values fell outside the training range and were clamped");
  const Vector labels = predict_labels(scores);
  emit(config.out, out, [&](std::ostream& o) {
    o << "score,label\n";
    for (Eigen::Index i = 0; i < scores.size(); ++i) o << format_number(scores[i]) << ',' << (labels[i] > 0 ? "+1" : "-1") << '\n';
  });
  const auto e = evaluate(scores, data.y);
  info("accuracy " + num(e.ca) + (e.auc ? ", AUC " + num(*e.auc) : std::string()) + " on " +
       std::to_string(data.size()) + " rows");
}

void cmd_gsi(const RunConfig& config, std::ostream& out) {
  const Model model = require_model(config);
  const auto report = gsi(model.set, model.coeffs);
  if (report.degenerate) warn("model has no variance outside the constant term; the ranking is empty");
  emit(config.out, out, [&](std::ostream& o) {
    Table t{"gsi", {"rank", "subset", "rho"}, {}};
    if (!report.degenerate)
      for (std::size_t i = 0; i < report.entries.size(); ++i)
        t.rows.push_back({num(i + 1), report.entries[i].subset.to_string(), num(report.entries[i].rho)});
    write_table(o, t);
  });
  if (!config.active_set.empty()) {
    const auto active = active_set(report, config.eps);
    save_active_set(active, config.active_set);
    info("active set with eps " + num(config.eps) + ": " + std::to_string(active.size()) + " subsets written to " +
         config.active_set);
  }
}

void cmd_refine(const RunConfig& config, std::ostream& out) {
  config.validate();
  FeatureSpec features = feature_spec(config);
  std::optional<SubsetFamily> family;
  if (!config.active_set.empty()) {
    family = load_active_set(config.active_set);
  } else if (!config.model.empty()) {
    const Model model = load_model(config.model);
    features.basis = model.basis();
    features.normalization = model.normalization;
    family = active_set(gsi(model.set, model.coeffs), config.eps);
  } else {
    fail(ErrorCode::config_error, "refine needs an active set (active-set=<path>) or a model (model=<path>)");
  }
  int d = 0;
  if (!config.data.empty()) {
    // peek at the dimension, the data is read again by the fit
    d = load_dataset(config, config.data).dimension();
  } else {
    d = toy_dimension(parse_toy_problem(config.toy));
  }
  for (const auto& u : family->subsets())
    if (u.max_dim() > d)
      fail(ErrorCode::config_error, "active set refers to dimension " + std::to_string(u.max_dim()) + " but the data has " +
                                        std::to_string(d) + " features");
  if (family->dimension() != d) {
    std::vector<AnovaSubset> subsets = family->subsets();
    family = SubsetFamily(d, std::move(subsets));
  }
  RunConfig c = config;
  c.model.clear();  // an input here, models of the refit go to out=<directory>
  c.basis = features.basis;
  c.normalization = features.normalization;
  info("refitting on " + std::to_string(family->size()) + " subsets");
  fit_and_report(c, features, std::move(family), out);
}

void cmd_bench(const RunConfig& config, std::ostream& out) {
  if (config.suite.empty()) fail(ErrorCode::config_error, "no suite given (suite=<name>)");
  SuiteOptions o;
  o.runs = config.runs;
  o.data = config.data;
  o.seed = config.seed;
  o.jobs = config.jobs;
  o.max_rows = config.delimited.max_rows;
  o.solve = config.solve;
  const auto tables = run_suite(config.suite, o);
  if (is_directory_target(config.out)) {
    ensure_directory(config.out);
    for (const auto& t : tables)
      emit((fs::path(config.out) / (t.name + ".csv")).string(), out, [&](std::ostream& f) { write_table(f, t); });
    return;
  }
  emit(config.out, out, [&](std::ostream& o) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      o << (i ? "\n" : "") << "# " << tables[i].name << '\n';
      write_table(o, tables[i]);
    }
  });
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  const ToySpec spec{parse_toy_problem(config.toy), config.basis, config.samples, config.seed, config.normalization};
  const auto data = generate(spec);
  emit(config.out, out, [&](std::ostream& o) { write_delimited(o, data, config.delimited.delimiter, false); });
}

}  // namespace anovasvm
