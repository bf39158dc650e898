#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anovasvm/indexsets.hpp"

namespace anovasvm {

/// Per-active-dimension constant of the cosine system: sqrt(2) keeps the
/// system orthonormal on [0, 1/2]^d, `factor2` uses the constant 2 instead of sqrt(2).
enum class CosineNormalization { orthonormal, factor2 };

const char* normalization_name(CosineNormalization norm) noexcept;
CosineNormalization parse_normalization(std::string_view text);
double cosine_constant(CosineNormalization norm) noexcept;

inline constexpr double kDomainTolerance = 1e-12;

/// One multivariate basis function. `dims` are the active (1-based)
/// coordinates; `freq` holds cosine frequencies, `level`/`shift` the Haar
/// pair, each parallel to `dims`. Inactive dims have k = 0, resp. j = -1.
struct BasisIndex {
  BasisKind kind = BasisKind::cosine;
  std::vector<int> dims;
  std::vector<int> freq;
  std::vector<int> level;
  std::vector<int> shift;

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

// univariate pieces; k = 0 resp. j = -1 give the constant 1
double cosine_1d(int k, double x, CosineNormalization norm = CosineNormalization::orthonormal);
double haar_1d(int j, int k, double x);

/// Position of x in [0, 1) after the shift by 1/2 and the periodic wrap.
double haar_wrap(double x) noexcept;

bool in_cosine_domain(double x) noexcept;

double eval_cosine(const BasisIndex& index, std::span<const double> x,
                   CosineNormalization norm = CosineNormalization::orthonormal);
double eval_haar(const BasisIndex& index, std::span<const double> x);

BasisIndex index_at(const GroupedIndexSet& set, std::size_t position);

double eval_tensor(const GroupedIndexSet& set, std::size_t position, std::span<const double> x,
                   CosineNormalization norm = CosineNormalization::orthonormal);

}  // namespace anovasvm
