#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anovasvm/analysis.hpp"
#include "anovasvm/config.hpp"
#include "anovasvm/data.hpp"
#include "anovasvm/indexsets.hpp"
#include "anovasvm/model.hpp"
#include "anovasvm/solver.hpp"
#include "anovasvm/synthetic.hpp"

namespace anovasvm {

// logging

enum class LogLevel { info = 0, warning = 1 };
using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink (default: stderr). Calls are serialized.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& message);

// feature maps

struct FeatureSpec {
  BasisKind basis = BasisKind::cosine;
  CosineNormalization normalization = CosineNormalization::orthonormal;
  int ds = 2;
  std::vector<int> per_order{6, 4};
  std::map<std::string, std::vector<int>> overrides;  // subset text -> bandwidth
};

FeatureSpec feature_spec(const RunConfig& config);

/// Grouped set over the given family; bandwidths come from per_order unless
/// the subset has an override.
GroupedIndexSet build_feature_set(const FeatureSpec& spec, const SubsetFamily& family);
GroupedIndexSet build_feature_set(const FeatureSpec& spec, int dimension);

// fitting along a lambda path

struct Evaluation {
  double ca = 0.0;
  std::optional<double> auc;  // absent when the labels hold a single class
};

Evaluation evaluate(const Vector& scores, const Vector& labels);

struct PathPoint {
  double lambda = 0.0;
  SolveResult solve;
  double train_ca = 0.0;
  Evaluation test;
  double seconds = 0.0;
};

std::vector<PathPoint> fit_path(const FeatureTransform& train, const Vector& train_labels,
                                const FeatureTransform& test, const Vector& test_labels, RegKind reg,
                                const std::vector<double>& lambdas, const SolveConfig& solve);

/// Highest test CA, ties toward the larger lambda.
std::size_t best_index(const std::vector<PathPoint>& path);
/// Highest test AUC (points without AUC never win), ties toward the larger lambda.
std::size_t best_auc_index(const std::vector<PathPoint>& path);

// repeated train/test protocol

struct DataSource {
  // synthetic: fresh train and test points per run
  std::optional<ToySpec> toy;
  std::size_t toy_test_size = 0;
  // file based: either a fixed test set or a random split per run
  std::optional<Dataset> data;
  std::optional<Dataset> test_data;
  std::optional<std::size_t> train_count;
  std::optional<double> train_ratio;
  bool scale = true;  // min-max scaling fitted on the training part
};

struct RunData {
  Dataset train;
  Dataset test;
  std::optional<ScalingRecord> scaling;
  std::size_t clamped = 0;  // test cells clamped into the domain
};

RunData make_run_data(const DataSource& source, BasisKind basis, std::uint64_t seed, std::size_t run);

struct RefitSpec {
  FeatureSpec features;
  RegKind reg = RegKind::l1;
  std::vector<double> lambdas;
};

struct ProtocolSpec {
  DataSource source;
  FeatureSpec features;
  std::optional<SubsetFamily> family;  // default: every subset up to ds
  RegKind reg = RegKind::l2;
  std::vector<double> lambdas{0.01};
  SolveConfig solve;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool keep_models = false;

  // sensitivity analysis of each run's model (best CA unless gsi_lambda is set)
  bool analyse = false;
  std::optional<double> gsi_lambda;
  double eps = 0.01;
  std::optional<RefitSpec> refit;  // refit on the active set, implies analyse
};

struct RunOutcome {
  std::size_t run = 0;
  std::vector<PathPoint> path;
  std::size_t best = 0;
  std::size_t best_auc = 0;
  std::size_t cardinality = 0;
  std::size_t clamped = 0;
  std::optional<Model> model;  // model at `best`
  std::optional<GsiReport> gsi;
  std::optional<SubsetFamily> active;
  std::vector<PathPoint> refit_path;
  std::size_t refit_cardinality = 0;
};

struct ProtocolResult {
  std::vector<double> lambdas;
  std::vector<RunOutcome> runs;
  std::vector<double> mean_ca;   // per lambda, in percent
  std::vector<double> mean_auc;  // per lambda, NaN where no run had an AUC
  double mean_best_ca = 0.0;
  double mean_best_auc = 0.0;
  std::vector<double> refit_lambdas;
  std::vector<double> refit_mean_ca;
  std::vector<double> refit_mean_auc;

  std::size_t count_active(const SubsetFamily& expected) const;
  std::size_t lambda_index(double lambda) const;
  std::size_t refit_lambda_index(double lambda) const;
};

ProtocolResult run_protocol(const ProtocolSpec& spec);

/// Runs body(0..count-1) on up to `jobs` threads; the first exception in
/// index order is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

// benchmark suites

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_table(std::ostream& out, const Table& table, char delimiter = ',');
std::string format_number(double value);

const std::vector<std::string>& suite_names();

struct SuiteOptions {
  std::optional<std::size_t> runs;
  std::string data;  // real-data suites; default data/<suite>.csv
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::size_t max_rows = 0;
  SolveConfig solve;
};

std::vector<Table> run_suite(const std::string& name, const SuiteOptions& options);

// active-set files

void save_active_set(const SubsetFamily& family, std::ostream& out);
void save_active_set(const SubsetFamily& family, const std::string& path);
SubsetFamily load_active_set(std::istream& in);
SubsetFamily load_active_set(const std::string& path);

// subcommands; tabular output goes to `out` unless config.out names a target

void cmd_fit(const RunConfig& config, std::ostream& out);
void cmd_predict(const RunConfig& config, std::ostream& out);
void cmd_gsi(const RunConfig& config, std::ostream& out);
void cmd_refine(const RunConfig& config, std::ostream& out);
void cmd_bench(const RunConfig& config, std::ostream& out);
void cmd_synth(const RunConfig& config, std::ostream& out);

/// Reads a dataset honouring config.format and config.delimited.
Dataset load_dataset(const RunConfig& config, const std::string& path);

}  // namespace anovasvm
