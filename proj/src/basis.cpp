#include "anovasvm/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "anovasvm/errors.hpp"

namespace anovasvm {

const char* normalization_name(CosineNormalization norm) noexcept {
  return norm == CosineNormalization::orthonormal ? "orthonormal" : "factor2";
}

CosineNormalization parse_normalization(std::string_view text) {
  if (text == "orthonormal") return CosineNormalization::orthonormal;
  if (text == "factor2") return CosineNormalization::factor2;
  fail(ErrorCode::invalid_argument, "unknown cosine normalization '" + std::string(text) + "'");
}

double cosine_constant(CosineNormalization norm) noexcept {
  return norm == CosineNormalization::orthonormal ? std::numbers::sqrt2 : 2.0;
}

bool in_cosine_domain(double x) noexcept {
  return x >= -kDomainTolerance && x <= 0.5 + kDomainTolerance;
}

double cosine_1d(int k, double x, CosineNormalization norm) {
  if (!in_cosine_domain(x))
    fail(ErrorCode::domain_error, "cosine basis evaluated outside [0, 1/2]: x = " + std::to_string(x));
  if (k == 0) return 1.0;
  return cosine_constant(norm) * std::cos(2.0 * std::numbers::pi * k * x);
}

double haar_wrap(double x) noexcept {
  const double y = x + 0.5;
  const double w = y - std::floor(y);
  return w >= 1.0 ? 0.0 : w;
}

double haar_1d(int j, int k, double x) {
  if (j < 0) return 1.0;
  // 2^j y - k lands in [0,1/2) or [1/2,1) iff floor(2^{j+1} y) is 2k or 2k+1
  const double y = haar_wrap(x);
  const auto h = static_cast<long long>(std::ldexp(y, j + 1));
  if ((h >> 1) != k) return 0.0;
  const double amp = std::ldexp(1.0, j / 2) * ((j & 1) ? std::numbers::sqrt2 : 1.0);
  return (h & 1) ? -amp : amp;
}

double eval_cosine(const BasisIndex& index, std::span<const double> x, CosineNormalization norm) {
  if (index.kind != BasisKind::cosine) fail(ErrorCode::invalid_argument, "expected a cosine index");
  for (double xi : x)
    if (!in_cosine_domain(xi))
      fail(ErrorCode::domain_error, "point outside [0, 1/2]^d: coordinate " + std::to_string(xi));
  double value = 1.0;
  for (std::size_t i = 0; i < index.dims.size(); ++i) {
    const int dim = index.dims[i];
    if (dim < 1 || static_cast<std::size_t>(dim) > x.size())
      fail(ErrorCode::invalid_argument, "basis index refers to dim " + std::to_string(dim));
    value *= cosine_1d(index.freq[i], x[dim - 1], norm);
  }
  return value;
}

double eval_haar(const BasisIndex& index, std::span<const double> x) {
  if (index.kind != BasisKind::haar) fail(ErrorCode::invalid_argument, "expected a haar index");
  double value = 1.0;
  for (std::size_t i = 0; i < index.dims.size(); ++i) {
    const int dim = index.dims[i];
    if (dim < 1 || static_cast<std::size_t>(dim) > x.size())
      fail(ErrorCode::invalid_argument, "basis index refers to dim " + std::to_string(dim));
    value *= haar_1d(index.level[i], index.shift[i], x[dim - 1]);
    if (value == 0.0) break;
  }
  return value;
}

BasisIndex index_at(const GroupedIndexSet& set, std::size_t position) {
  const auto loc = set.locate(position);
  const auto& term = set.terms()[loc.term];
  BasisIndex index;
  index.kind = set.kind();
  index.dims = term.subset().dims();
  if (set.kind() == BasisKind::cosine) {
    const auto k = term.frequency(loc.entry);
    index.freq.assign(k.begin(), k.end());
  } else {
    const auto j = term.level(term.level_of(loc.entry));
    const auto k = term.shift(loc.entry);
    index.level.assign(j.begin(), j.end());
    index.shift.assign(k.begin(), k.end());
  }
  return index;
}

double eval_tensor(const GroupedIndexSet& set, std::size_t position, std::span<const double> x,
                   CosineNormalization norm) {
  if (x.size() != static_cast<std::size_t>(set.dimension()))
    fail(ErrorCode::invalid_argument, "point has " + std::to_string(x.size()) +
                                          " coordinates, index set expects " +
                                          std::to_string(set.dimension()));
  const BasisIndex index = index_at(set, position);
  return set.kind() == BasisKind::cosine ? eval_cosine(index, x, norm) : eval_haar(index, x);
}

}  // namespace anovasvm
