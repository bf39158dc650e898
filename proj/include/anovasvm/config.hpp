#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anovasvm/basis.hpp"
#include "anovasvm/data.hpp"
#include "anovasvm/indexsets.hpp"
#include "anovasvm/solver.hpp"

namespace anovasvm {

/// Everything a subcommand needs. Keys of the flat config file are the long
/// CLI flag names without the leading dashes.
struct RunConfig {
  // inputs
  std::string data;
  std::string test_data;
  std::string model;
  std::string active_set;
  std::string format = "auto";  // auto | csv | libsvm
  DelimitedOptions delimited;
  bool scale = true;

  // feature map
  BasisKind basis = BasisKind::cosine;
  CosineNormalization normalization = CosineNormalization::orthonormal;
  int ds = 2;
  std::vector<int> per_order{6, 4};  // n1, n2, ...
  std::map<std::string, std::vector<int>> bandwidth_overrides;  // subset text -> bandwidth

  // optimisation
  RegKind reg = RegKind::l2;
  std::vector<double> lambdas{0.01};
  SolveConfig solve;

  // protocol
  std::optional<std::size_t> train_count;
  std::optional<double> train_ratio;
  std::uint64_t seed = 1;
  std::optional<std::size_t> runs;  // unset: 1 for fit, the suite default for bench
  std::size_t jobs = 1;
  double eps = 0.01;

  // bench / synth
  std::string suite;
  std::string toy = "toy1d";
  std::size_t samples = 100;
  std::optional<std::size_t> test_samples;

  std::string out;
  std::string trace;  // objective traces of fit/refine

  void set(std::string_view key, std::string_view value);
  void validate() const;
};

/// Known keys, for help output and error messages.
const std::vector<std::string>& config_keys();

void load_config_file(RunConfig& config, const std::string& path);
void load_config(RunConfig& config, std::istream& in, const std::string& origin = "<config>");

/// "0.5,2^-3,0", with "2^a..2^b" expanding to every power in between
/// (descending); the result is sorted by decreasing lambda.
std::vector<double> parse_lambda_grid(std::string_view text);

std::vector<int> parse_int_list(std::string_view text);

}  // namespace anovasvm
