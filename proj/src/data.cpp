#include "anovasvm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "anovasvm/errors.hpp"
#include "anovasvm/random.hpp"

namespace anovasvm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

// Accumulates labels and decides on the alphabet ({0,1} or {-1,+1}).
class LabelReader {
public:
  double read(std::string_view text, std::size_t line) {
    double v = 0;
    if (!parse_double(text, v)) parse_fail(line, "label '" + std::string(trim(text)) + "' is not numeric");
    if (v == 0.0) {
      seen_zero_ = true;
    } else if (v == -1.0) {
      seen_minus_ = true;
    } else if (v != 1.0) {
      parse_fail(line, "label '" + std::string(trim(text)) + "' is neither 0/1 nor -1/+1");
    }
    if (seen_zero_ && seen_minus_) parse_fail(line, "labels mix the 0/1 and -1/+1 alphabets");
    return v == 1.0 ? 1.0 : -1.0;
  }
  LabelAlphabet alphabet() const {
    return seen_zero_ ? LabelAlphabet::zero_one : LabelAlphabet::plus_minus_one;
  }

private:
  bool seen_zero_ = false;
  bool seen_minus_ = false;
};

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = line.find(delim, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? line.npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string format_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::size_t Dataset::positives() const noexcept {
  return static_cast<std::size_t>((y.array() > 0).count());
}

void Dataset::validate() const {
  if (X.rows() < 1) fail(ErrorCode::invalid_argument, "dataset has no rows");
  if (y.size() != X.rows()) fail(ErrorCode::invalid_argument, "dataset label count differs from row count");
  if (!X.allFinite()) fail(ErrorCode::invalid_argument, "dataset contains non-finite features");
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (y[j] != 1.0 && y[j] != -1.0) fail(ErrorCode::invalid_argument, "dataset labels must be -1 or +1");
  if (!names.empty() && names.size() != static_cast<std::size_t>(X.cols()))
    fail(ErrorCode::invalid_argument, "feature name count differs from column count");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= size()) fail(ErrorCode::index_error, "row index out of range");
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    out.y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  }
  out.names = names;
  out.alphabet = alphabet;
  return out;
}

Dataset parse_delimited(std::istream& in, const DelimitedOptions& options) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::vector<std::string> names;
  LabelReader reader;
  std::size_t width = 0, line_no = 0;
  bool header_pending = options.header;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_fields(line, options.delimiter);
    if (width == 0) {
      if (fields.size() < 1) parse_fail(line_no, "empty row");
      width = fields.size();
    } else if (fields.size() != width) {
      parse_fail(line_no, "expected " + std::to_string(width) + " fields, found " +
                              std::to_string(fields.size()));
    }
    const long label_col = options.label_column < 0 ? static_cast<long>(width) + options.label_column
                                                    : options.label_column;
    if (label_col < 0 || label_col >= static_cast<long>(width))
      parse_fail(line_no, "label column " + std::to_string(options.label_column) + " out of range");
    if (header_pending) {
      header_pending = false;
      for (std::size_t c = 0; c < width; ++c)
        if (static_cast<long>(c) != label_col) names.emplace_back(trim(fields[c]));
      continue;
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<long>(c) == label_col) {
        labels.push_back(reader.read(fields[c], line_no));
        continue;
      }
      double v = 0;
      if (!parse_double(fields[c], v))
        parse_fail(line_no, "field " + std::to_string(c + 1) + " ('" + std::string(trim(fields[c])) +
                                "') is not a finite number");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    if (options.max_rows != 0 && rows.size() == options.max_rows) break;
  }
  if (rows.empty()) parse_fail(line_no, "no data rows");

  Dataset out;
  const auto d = static_cast<Eigen::Index>(width - 1);
  out.X.resize(static_cast<Eigen::Index>(rows.size()), d);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) out.X(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    out.y[static_cast<Eigen::Index>(r)] = labels[r];
  }
  out.names = std::move(names);
  out.alphabet = reader.alphabet();
  return out;
}

Dataset parse_delimited(const std::string& text, const DelimitedOptions& options) {
  std::istringstream in(text);
  return parse_delimited(in, options);
}

Dataset parse_libsvm(std::istream& in) {
  struct Row {
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  std::vector<double> labels;
  LabelReader reader;
  int max_index = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (is_blank(view)) continue;
    std::istringstream tokens{std::string(view)};
    std::string token;
    tokens >> token;
    labels.push_back(reader.read(token, line_no));
    Row row;
    int last = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) parse_fail(line_no, "malformed pair '" + token + "'");
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + colon, idx);
      if (ec != std::errc() || ptr != token.data() + colon || idx < 1)
        parse_fail(line_no, "malformed index in '" + token + "'");
      if (idx <= last) parse_fail(line_no, "indices must be strictly increasing ('" + token + "')");
      double v = 0;
      if (!parse_double(std::string_view(token).substr(colon + 1), v))
        parse_fail(line_no, "malformed value in '" + token + "'");
      row.entries.emplace_back(idx, v);
      last = idx;
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_fail(line_no, "no data rows");
  Dataset out;
  out.X = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [idx, v] : rows[r].entries) out.X(static_cast<Eigen::Index>(r), idx - 1) = v;
    out.y[static_cast<Eigen::Index>(r)] = labels[r];
  }
  out.alphabet = reader.alphabet();
  return out;
}

Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

Dataset read_delimited(const std::string& path, const DelimitedOptions& options) {
  if (path == "-") return parse_delimited(std::cin, options);
  auto in = open_input(path);
  return parse_delimited(in, options);
}

Dataset read_libsvm(const std::string& path) {
  if (path == "-") return parse_libsvm(std::cin);
  auto in = open_input(path);
  return parse_libsvm(in);
}

Dataset read_dataset(const std::string& path, const DelimitedOptions& options) {
  const auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".svm") || ends_with(".libsvm")) return read_libsvm(path);
  return read_delimited(path, options);
}

std::string format_label(double label, LabelAlphabet alphabet) {
  if (alphabet == LabelAlphabet::zero_one) return label > 0 ? "1" : "0";
  return label > 0 ? "+1" : "-1";
}

void write_delimited(std::ostream& out, const Dataset& data, char delimiter, bool header) {
  if (header) {
    out << "label";
    for (Eigen::Index c = 0; c < data.X.cols(); ++c)
      out << delimiter
          << (data.names.empty() ? "x" + std::to_string(c + 1) : data.names[static_cast<std::size_t>(c)]);
    out << '\n';
  }
  for (Eigen::Index r = 0; r < data.X.rows(); ++r) {
    out << format_label(data.y[r], data.alphabet);
    for (Eigen::Index c = 0; c < data.X.cols(); ++c) out << delimiter << format_value(data.X(r, c));
    out << '\n';
  }
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (Eigen::Index r = 0; r < data.X.rows(); ++r) {
    out << format_label(data.y[r], data.alphabet);
    for (Eigen::Index c = 0; c < data.X.cols(); ++c)
      if (data.X(r, c) != 0.0) out << ' ' << (c + 1) << ':' << format_value(data.X(r, c));
    out << '\n';
  }
}

double domain_lower(BasisKind domain) noexcept { return domain == BasisKind::cosine ? 0.0 : -0.5; }

double domain_upper(BasisKind domain) noexcept {
  return domain == BasisKind::cosine ? 0.5 : 0.5 - kHaarUpperGap;
}

ScalingRecord fit_scaling(const Matrix& X, BasisKind domain) {
  if (X.rows() < 1) fail(ErrorCode::invalid_argument, "cannot fit scaling on an empty matrix");
  ScalingRecord rec;
  rec.domain = domain;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double lo = X.col(c).minCoeff(), hi = X.col(c).maxCoeff();
    rec.min.push_back(lo);
    rec.max.push_back(hi);
    rec.constant.push_back(!(hi > lo));
  }
  return rec;
}

ScalingRecord fit_scaling(const Dataset& data, BasisKind domain) { return fit_scaling(data.X, domain); }

Matrix apply_scaling(const ScalingRecord& record, const Matrix& X, std::size_t* clamped) {
  if (X.cols() != record.dimension())
    fail(ErrorCode::invalid_argument, "scaling record has " + std::to_string(record.dimension()) +
                                          " dims, data has " + std::to_string(X.cols()));
  const double lo = domain_lower(record.domain), hi = domain_upper(record.domain);
  const double mid = record.domain == BasisKind::cosine ? 0.25 : 0.0;
  std::size_t count = 0;
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const double mn = record.min[ci], mx = record.max[ci];
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const double x = X(r, c);
      if (record.constant[ci]) {
        if (x != mn) ++count;
        out(r, c) = mid;
        continue;
      }
      if (x < mn || x > mx) ++count;
      const double v = lo + (x - mn) / (mx - mn) * (hi - lo);
      out(r, c) = std::clamp(v, lo, hi);
    }
  }
  if (clamped) *clamped = count;
  return out;
}

Dataset apply_scaling(const ScalingRecord& record, const Dataset& data, std::size_t* clamped) {
  Dataset out = data;
  out.X = apply_scaling(record, data.X, clamped);
  return out;
}

std::size_t train_count_for_ratio(std::size_t rows, double ratio) {
  if (!(ratio > 0 && ratio < 1)) fail(ErrorCode::invalid_argument, "train ratio must lie in (0,1)");
  return static_cast<std::size_t>(std::llround(static_cast<double>(rows) * ratio));
}

Split split(const Dataset& data, std::size_t train_count, std::uint64_t seed) {
  const std::size_t M = data.size();
  if (train_count < 1 || train_count >= M)
    fail(ErrorCode::invalid_argument, "train size " + std::to_string(train_count) +
                                          " must lie in [1, " + std::to_string(M) + ")");
  std::vector<std::size_t> perm(M);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  Split s;
  s.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_count));
  s.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_count), perm.end());
  s.train = data.subset(s.train_rows);
  s.test = data.subset(s.test_rows);
  return s;
}

Split split_ratio(const Dataset& data, double train_ratio, std::uint64_t seed) {
  return split(data, train_count_for_ratio(data.size(), train_ratio), seed);
}

}  // namespace anovasvm
