#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "anovasvm/basis.hpp"
#include "anovasvm/data.hpp"
#include "anovasvm/indexsets.hpp"
#include "anovasvm/solver.hpp"

namespace anovasvm {

inline constexpr int kModelFormatVersion = 1;

struct Provenance {
  std::uint64_t seed = 0;
  RegSpec reg;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  StopReason stop = StopReason::max_iters;
};

/// A fitted classifier: feature layout, coefficients and the scaling that
/// maps raw inputs into the basis domain (absent when inputs are used as is).
struct Model {
  GroupedIndexSet set;
  CosineNormalization normalization = CosineNormalization::orthonormal;
  Vector coeffs;
  std::optional<ScalingRecord> scaling;
  Provenance provenance;

  BasisKind basis() const noexcept { return set.kind(); }
  int dimension() const noexcept { return set.dimension(); }
  void validate() const;

  Matrix to_domain(const Matrix& raw, std::size_t* clamped = nullptr) const;
  Vector decision_values(const Matrix& raw, std::size_t* clamped = nullptr) const;
  Vector predict(const Matrix& raw) const;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::string& path);
Model load_model(std::istream& in);
Model load_model(const std::string& path);

std::string serialize_model(const Model& model);
Model parse_model(const std::string& text);

/// Exact text form of a double, 16 hex digits of its IEEE-754 bits.
std::string double_to_hex(double value);
double hex_to_double(std::string_view text);

}  // namespace anovasvm
