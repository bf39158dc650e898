#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "anovasvm/indexsets.hpp"
#include "anovasvm/transform.hpp"

namespace anovasvm {

/// Label spelling found in the source; labels are always stored as -1/+1.
enum class LabelAlphabet { plus_minus_one, zero_one };

struct Dataset {
  Matrix X;
  Vector y;
  std::vector<std::string> names;  // optional, one per feature column
  LabelAlphabet alphabet = LabelAlphabet::plus_minus_one;

  std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
  int dimension() const noexcept { return static_cast<int>(X.cols()); }
  std::size_t positives() const noexcept;

  void validate() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

struct DelimitedOptions {
  char delimiter = ',';
  int label_column = 0;  // 0-based; negative counts from the end (-1 = last)
  bool header = false;
  std::size_t max_rows = 0;  // stop after this many data rows; 0 reads everything
};

Dataset parse_delimited(std::istream& in, const DelimitedOptions& options = {});
Dataset parse_delimited(const std::string& text, const DelimitedOptions& options = {});
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm(const std::string& text);

// "-" reads standard input
Dataset read_delimited(const std::string& path, const DelimitedOptions& options = {});
Dataset read_libsvm(const std::string& path);
/// LIBSVM reader for *.svm and *.libsvm, delimited reader otherwise.
Dataset read_dataset(const std::string& path, const DelimitedOptions& options = {});

// writers put the label first and restore the source label alphabet
void write_delimited(std::ostream& out, const Dataset& data, char delimiter = ',', bool header = false);
void write_libsvm(std::ostream& out, const Dataset& data);

std::string format_label(double label, LabelAlphabet alphabet);

struct ScalingRecord {
  BasisKind domain = BasisKind::cosine;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<bool> constant;

  int dimension() const noexcept { return static_cast<int>(min.size()); }
  friend bool operator==(const ScalingRecord&, const ScalingRecord&) = default;
};

inline constexpr double kHaarUpperGap = 1e-9;

double domain_lower(BasisKind domain) noexcept;
double domain_upper(BasisKind domain) noexcept;

/// Min-max map onto [0, 1/2] (cosine) or [-1/2, 1/2 - 1e-9] (haar).
ScalingRecord fit_scaling(const Matrix& X, BasisKind domain);
ScalingRecord fit_scaling(const Dataset& data, BasisKind domain);

/// Values outside the fitted range are clamped into the domain;
/// `clamped` (optional) receives the number of clamped cells.
Matrix apply_scaling(const ScalingRecord& record, const Matrix& X, std::size_t* clamped = nullptr);
Dataset apply_scaling(const ScalingRecord& record, const Dataset& data, std::size_t* clamped = nullptr);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

Split split(const Dataset& data, std::size_t train_count, std::uint64_t seed);
Split split_ratio(const Dataset& data, double train_ratio, std::uint64_t seed);

/// Training size for a ratio, round(M * ratio).
std::size_t train_count_for_ratio(std::size_t rows, double ratio);

}  // namespace anovasvm
