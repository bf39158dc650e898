// anovasvm command-line front end; talks to the library through the C API only.

#include <cstdio>
#include <deque>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "anovasvm/anovasvm.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
};

// one CLI option feeding one configuration key
struct Bound {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

const std::vector<Flag> kData = {
    {"data", "training data (csv or libsvm; '-' reads stdin)"},
    {"test-data", "fixed test set instead of a random split"},
    {"format", "auto, csv or libsvm"},
    {"delimiter", "field delimiter of delimited files (a character, 'tab' or 'space')"},
    {"label-column", "0-based label column, negative counts from the end, or 'last'"},
    {"scale", "min-max scale features into the basis domain (true/false)"},
    {"max-rows", "read at most this many rows"},
};
const std::vector<Flag> kFeatures = {
    {"basis", "cos or haar"},
    {"normalization", "cosine normalization: orthonormal or factor2"},
    {"ds", "superposition dimension"},
    {"n1", "bandwidth of one-dimensional terms"},
    {"n2", "bandwidth of two-dimensional terms"},
    {"n3", "bandwidth of three-dimensional terms"},
    {"bandwidths", "bandwidths per order, e.g. 6,4"},
};
const std::vector<Flag> kSolver = {
    {"reg", "l1 or l2"},
    {"lambda", "regularization parameter (number or 2^k)"},
    {"lambda-grid", "comma list of lambdas; 2^a..2^b expands to all powers between"},
    {"max-iters", "iteration limit"},
    {"grad-tol", "gradient-norm tolerance"},
    {"obj-tol", "objective-change tolerance"},
    {"step-tol", "step-length tolerance"},
    {"armijo-sigma", "Armijo sufficient-decrease constant"},
    {"armijo-shrink", "Armijo backtracking factor"},
    {"armijo-initial-step", "first trial step of gradient descent"},
    {"fista-l0", "initial Lipschitz estimate of FISTA"},
    {"fista-theta", "Lipschitz growth factor of FISTA backtracking"},
};
const std::vector<Flag> kProtocol = {
    {"seed", "base seed"},
    {"runs", "repetitions"},
    {"train-count", "training rows per random split"},
    {"train-ratio", "training fraction per random split"},
    {"jobs", "parallel repetitions"},
};
const std::vector<Flag> kToy = {
    {"toy", "synthetic problem when no data is given: toy1d, toy6d or friedman10d"},
    {"samples", "synthetic training points"},
    {"test-samples", "synthetic test points (default: samples)"},
};

class Cli {
public:
  void bind(CLI::App* sub, const std::vector<Flag>& flags) {
    for (const auto& f : flags) bind(sub, f.key, f.help);
  }

  void bind(CLI::App* sub, const char* key, const char* help) {
    auto& b = bound_.emplace_back();
    b.key = key;
    b.option = sub->add_option(std::string("--") + key, b.value, help);
  }

  void header_flag(CLI::App* sub) {
    auto& b = bound_.emplace_back();
    b.key = "header";
    b.value = "true";
    b.option = sub->add_flag("--header", "first row of delimited files holds column names");
  }

  void bandwidth_overrides(CLI::App* sub) {
    sub->add_option("--bandwidth", overrides_, "per-subset bandwidth, e.g. 2+3=4,4 (repeatable)");
  }

  // config file first, then every flag given on the command line
  int apply(asvm_config* config, const std::string& config_file) {
    if (!config_file.empty())
      if (const auto st = asvm_config_load(config, config_file.c_str()); st != ASVM_OK) return report(st);
    for (const auto& b : bound_) {
      if (b.option->count() == 0) continue;
      if (const auto st = asvm_config_set(config, b.key.c_str(), b.value.c_str()); st != ASVM_OK) return report(st);
    }
    for (const auto& o : overrides_) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --bandwidth expects SUBSET=N[,N...], got '%s'\n", o.c_str());
        return 2;
      }
      const auto key = "bandwidth." + o.substr(0, eq);
      if (const auto st = asvm_config_set(config, key.c_str(), o.substr(eq + 1).c_str()); st != ASVM_OK)
        return report(st);
    }
    return 0;
  }

  static int report(asvm_status status) {
    std::fprintf(stderr, "error: %s\n", asvm_last_error());
    return asvm_exit_code(status);
  }

private:
  std::deque<Bound> bound_;
  std::vector<std::string> overrides_;
};

void log_to_stderr(asvm_log_level level, const char* message, void* user) {
  const bool quiet = *static_cast<bool*>(user);
  if (quiet && level == ASVM_LOG_INFO) return;
  std::fprintf(stderr, "%s%s\n", level == ASVM_LOG_WARNING ? "warning: " : "", message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable ANOVA-based support vector classification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", asvm_version());
  std::string config_file;
  bool quiet = false;
  app.add_option("--config", config_file, "flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_flag("-q,--quiet", quiet, "only print warnings and errors");

  Cli cli;
  using Command = asvm_status (*)(const asvm_config*);
  std::vector<std::pair<CLI::App*, Command>> commands;

  auto* fit = app.add_subcommand("fit", "fit classifiers over a lambda grid and report test metrics");
  for (const auto* g : {&kData, &kFeatures, &kSolver, &kProtocol, &kToy}) cli.bind(fit, *g);
  cli.header_flag(fit);
  cli.bandwidth_overrides(fit);
  cli.bind(fit, "out", "report file, or a directory for report.csv and one model per run");
  cli.bind(fit, "model", "save the fitted model (single run)");
  cli.bind(fit, "trace", "write objective traces (run, lambda, iteration, objective)");
  commands.emplace_back(fit, asvm_cmd_fit);

  auto* predict = app.add_subcommand("predict", "score data with a saved model");
  cli.bind(predict, "model", "model file");
  cli.bind(predict, kData);
  cli.header_flag(predict);
  cli.bind(predict, "out", "prediction file (default stdout)");
  commands.emplace_back(predict, asvm_cmd_predict);

  auto* gsi = app.add_subcommand("gsi", "rank the ANOVA terms of a saved model by sensitivity");
  cli.bind(gsi, "model", "model file");
  cli.bind(gsi, "eps", "active-set threshold");
  cli.bind(gsi, "active-set", "write the active set to this file");
  cli.bind(gsi, "out", "ranking file (default stdout)");
  commands.emplace_back(gsi, asvm_cmd_gsi);

  auto* refine = app.add_subcommand("refine", "refit on the active set of a model or active-set file");
  cli.bind(refine, "model", "model whose active set is used");
  cli.bind(refine, "active-set", "active-set file (takes precedence over --model)");
  cli.bind(refine, "eps", "active-set threshold when reading a model");
  for (const auto* g : {&kData, &kFeatures, &kSolver, &kProtocol, &kToy}) cli.bind(refine, *g);
  cli.header_flag(refine);
  cli.bandwidth_overrides(refine);
  cli.bind(refine, "out", "report file, or a directory for report.csv and one model per run");
  cli.bind(refine, "trace", "write objective traces (run, lambda, iteration, objective)");
  commands.emplace_back(refine, asvm_cmd_refine);

  auto* bench = app.add_subcommand("bench", "run a benchmark suite and write its result tables");
  cli.bind(bench, "suite", "toy1d, toy6d, friedman10d, wbc, pid, susy or higgs");
  cli.bind(bench, "runs", "override the suite's repetition count");
  cli.bind(bench, "data", "data file of real-data suites (default data/<suite>.csv)");
  cli.bind(bench, "max-rows", "rows read from the data file");
  cli.bind(bench, "seed", "base seed");
  cli.bind(bench, "jobs", "parallel repetitions");
  cli.bind(bench, "max-iters", "iteration limit");
  cli.bind(bench, "out", "output file, or a directory for one file per table");
  commands.emplace_back(bench, asvm_cmd_bench);

  auto* synth = app.add_subcommand("synth", "generate a synthetic data set");
  cli.bind(synth, "toy", "toy1d, toy6d or friedman10d");
  cli.bind(synth, "basis", "basis domain of the points: cos or haar");
  cli.bind(synth, "samples", "number of points");
  cli.bind(synth, "seed", "seed");
  cli.bind(synth, "delimiter", "field delimiter");
  cli.bind(synth, "out", "output file (default stdout)");
  commands.emplace_back(synth, asvm_cmd_synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  asvm_set_log_callback(log_to_stderr, &quiet);
  asvm_config* config = nullptr;
  if (asvm_config_create(&config) != ASVM_OK) return Cli::report(ASVM_INTERNAL_ERROR);
  int rc = cli.apply(config, config_file);
  if (rc == 0) {
    for (const auto& [sub, run] : commands) {
      if (!sub->parsed()) continue;
      const asvm_status status = run(config);
      if (status != ASVM_OK) rc = Cli::report(status);
      break;
    }
  }
  asvm_config_destroy(config);
  return rc;
}
