#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "anovasvm/basis.hpp"
#include "anovasvm/data.hpp"
#include "anovasvm/indexsets.hpp"

namespace anovasvm {

// Gauss-Legendre rule on [-1, 1]
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int points);
double integrate(const std::function<double(double)>& f, double a, double b, int points = 64);

enum class ToyProblem { toy1d, toy6d, friedman10d };

const char* toy_problem_name(ToyProblem which) noexcept;
ToyProblem parse_toy_problem(std::string_view text);
int toy_dimension(ToyProblem which) noexcept;

struct ToySpec {
  ToyProblem which = ToyProblem::toy1d;
  BasisKind basis = BasisKind::cosine;
  std::size_t M = 100;
  std::uint64_t seed = 0;
  CosineNormalization normalization = CosineNormalization::orthonormal;
};

/// Grouped sets carrying the nonzero coefficients of the toy functions.
GroupedIndexSet toy1d_support(BasisKind basis);
GroupedIndexSet toy6d_support(BasisKind basis);

double toy1d_function(BasisKind basis, double x,
                      CosineNormalization norm = CosineNormalization::orthonormal);
double toy6d_function(BasisKind basis, std::span<const double> x,
                      CosineNormalization norm = CosineNormalization::orthonormal);

double friedman1(std::span<const double> x);

/// 10 * integral_0^1 (1 - cos(pi t)) / (pi t) dt
double friedman1_sine_constant();
double friedman1_mean();

/// The seven nonzero ANOVA terms of F1 on [0,1]^10; x_u holds the
/// coordinates of the dims in u, in order.
const std::vector<AnovaSubset>& friedman1_support();
double friedman1_anova_term(const AnovaSubset& u, std::span<const double> x_u);

/// F1(2x) - M on [0,1/2]^10, resp. F1(x + 1/2) - M on [-1/2,1/2)^10.
double friedman10d_function(BasisKind basis, std::span<const double> x);

double toy_function(ToyProblem which, BasisKind basis, std::span<const double> x,
                    CosineNormalization norm = CosineNormalization::orthonormal);

/// Uniform points in the basis domain labelled by the sign of the toy function.
Dataset generate(const ToySpec& spec);

struct ImportanceEntry {
  AnovaSubset subset;
  double percent = 0.0;
};

struct ImportanceResult {
  std::size_t samples = 0;
  std::size_t positives = 0;
  std::vector<ImportanceEntry> entries;
};

/// Percentage of uniform points in [0,1]^5 whose sign(F1 - M) flips when the
/// ANOVA term of u is dropped, for each u in the support.
ImportanceResult importance_experiment(std::size_t N, std::uint64_t seed);

}  // namespace anovasvm
