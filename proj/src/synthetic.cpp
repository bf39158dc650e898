#include "anovasvm/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "anovasvm/errors.hpp"
#include "anovasvm/random.hpp"

namespace anovasvm {

QuadratureRule gauss_legendre(int points) {
  if (points < 1) fail(ErrorCode::invalid_argument, "quadrature needs at least one point");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(points));
  rule.weights.resize(static_cast<std::size_t>(points));
  const int n = points;
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int points) {
  const auto rule = gauss_legendre(points);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

const char* toy_problem_name(ToyProblem which) noexcept {
  switch (which) {
    case ToyProblem::toy1d: return "toy1d";
    case ToyProblem::toy6d: return "toy6d";
    case ToyProblem::friedman10d: return "friedman10d";
  }
  return "unknown";
}

ToyProblem parse_toy_problem(std::string_view text) {
  if (text == "toy1d") return ToyProblem::toy1d;
  if (text == "toy6d") return ToyProblem::toy6d;
  if (text == "friedman10d" || text == "friedman") return ToyProblem::friedman10d;
  fail(ErrorCode::invalid_argument, "unknown toy problem '" + std::string(text) + "'");
}

int toy_dimension(ToyProblem which) noexcept {
  switch (which) {
    case ToyProblem::toy1d: return 1;
    case ToyProblem::toy6d: return 6;
    case ToyProblem::friedman10d: return 10;
  }
  return 0;
}

GroupedIndexSet toy1d_support(BasisKind basis) {
  const SubsetFamily family(1, {AnovaSubset{1}});
  return basis == BasisKind::cosine ? build_cosine_set(family, {{6}}) : build_wavelet_set(family, {{2}});
}

GroupedIndexSet toy6d_support(BasisKind basis) {
  // canonical order puts {4}, {6} ahead of {2,3}
  const SubsetFamily family(6, {AnovaSubset{4}, AnovaSubset{6}, AnovaSubset{2, 3}});
  if (basis == BasisKind::cosine) return build_cosine_set(family, {{6}, {4}, {2, 4}});
  return build_wavelet_set(family, {{3}, {3}, {3, 3}});
}

double toy1d_function(BasisKind basis, double x, CosineNormalization norm) {
  double sum = 0.0;
  if (basis == BasisKind::cosine) {
    for (int k = 1; k <= 5; ++k) sum += (k + 1) / 4.0 * cosine_1d(k, x, norm);
    return sum;
  }
  for (int j = 0; j <= 2; ++j)
    for (int k = 0; k < (1 << j); ++k) sum += (k + 1) / 4.0 * haar_1d(j, k, x);
  return sum;
}

double toy6d_function(BasisKind basis, std::span<const double> x, CosineNormalization norm) {
  if (x.size() != 6) fail(ErrorCode::invalid_argument, "toy6d expects 6 coordinates");
  const auto set = toy6d_support(basis);
  double sum = 0.0;
  for (std::size_t p = 0; p < set.cardinality(); ++p) sum += eval_tensor(set, p, x, norm);
  return sum;
}

namespace {

void check_unit_cube(std::span<const double> x) {
  for (double xi : x)
    if (!(xi >= -kDomainTolerance && xi <= 1.0 + kDomainTolerance))
      fail(ErrorCode::domain_error, "Friedman inputs must lie in [0,1]: got " + std::to_string(xi));
}

// 10 (1 - cos(pi x)) / (pi x), written with the half-angle form to stay
// accurate near x = 0
double sine_average(double x) {
  const double a = std::numbers::pi * x;
  if (a == 0.0) return 0.0;
  const double s = std::sin(0.5 * a);
  return 20.0 * s * s / a;
}

}  // namespace

double friedman1(std::span<const double> x) {
  if (x.size() < 5) fail(ErrorCode::invalid_argument, "Friedman-1 needs at least 5 coordinates");
  check_unit_cube(x);
  const double t = x[2] - 0.5;
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * t * t + 10.0 * x[3] + 5.0 * x[4];
}

double friedman1_sine_constant() {
  static const double value = integrate(sine_average, 0.0, 1.0, 64);
  return value;
}

double friedman1_mean() { return friedman1_sine_constant() + 55.0 / 6.0; }

const std::vector<AnovaSubset>& friedman1_support() {
  static const std::vector<AnovaSubset> support{AnovaSubset{},  AnovaSubset{1}, AnovaSubset{2},
                                                AnovaSubset{3}, AnovaSubset{4}, AnovaSubset{5},
                                                AnovaSubset{1, 2}};
  return support;
}

double friedman1_anova_term(const AnovaSubset& u, std::span<const double> x_u) {
  if (x_u.size() != u.size())
    fail(ErrorCode::invalid_argument, "expected " + std::to_string(u.size()) + " coordinates for " + u.to_string());
  check_unit_cube(x_u);
  const double mean = friedman1_mean();
  const double c = friedman1_sine_constant();
  const auto& dims = u.dims();
  if (dims.empty()) return mean;
  if (dims.size() == 1) {
    const double x = x_u[0];
    switch (dims[0]) {
      case 1:
      case 2: return sine_average(x) + 55.0 / 6.0 - mean;
      case 3: return c + 20.0 * (x - 0.5) * (x - 0.5) + 7.5 - mean;
      case 4: return c + 10.0 * x + 25.0 / 6.0 - mean;
      case 5: return c + 5.0 * x + 20.0 / 3.0 - mean;
      default: break;
    }
  } else if (dims == std::vector<int>{1, 2}) {
    return 10.0 * std::sin(std::numbers::pi * x_u[0] * x_u[1]) - sine_average(x_u[0]) -
           sine_average(x_u[1]) - 55.0 / 6.0 + mean;
  }
  fail(ErrorCode::invalid_argument, "subset " + u.to_string() + " carries no Friedman-1 ANOVA term");
}

double friedman10d_function(BasisKind basis, std::span<const double> x) {
  if (x.size() != 10) fail(ErrorCode::invalid_argument, "friedman10d expects 10 coordinates");
  double z[10];
  for (std::size_t i = 0; i < 10; ++i) z[i] = basis == BasisKind::cosine ? 2.0 * x[i] : x[i] + 0.5;
  return friedman1(std::span<const double>(z, 10)) - friedman1_mean();
}

double toy_function(ToyProblem which, BasisKind basis, std::span<const double> x,
                    CosineNormalization norm) {
  switch (which) {
    case ToyProblem::toy1d:
      if (x.size() != 1) fail(ErrorCode::invalid_argument, "toy1d expects 1 coordinate");
      return toy1d_function(basis, x[0], norm);
    case ToyProblem::toy6d: return toy6d_function(basis, x, norm);
    case ToyProblem::friedman10d: return friedman10d_function(basis, x);
  }
  return 0.0;
}

Dataset generate(const ToySpec& spec) {
  if (spec.M < 1) fail(ErrorCode::invalid_argument, "sample count must be >= 1");
  const int d = toy_dimension(spec.which);
  const double lo = spec.basis == BasisKind::cosine ? 0.0 : -0.5;
  Rng rng(spec.seed);
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(spec.M), d);
  out.y.resize(static_cast<Eigen::Index>(spec.M));
  std::vector<double> x(static_cast<std::size_t>(d));
  // toy6d evaluation builds its support once rather than per point
  const auto support = spec.which == ToyProblem::toy6d ? std::optional(toy6d_support(spec.basis)) : std::nullopt;
  for (std::size_t r = 0; r < spec.M; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (int c = 0; c < d; ++c) {
      // [0, 1/2] for cosine, [-1/2, 1/2) for haar
      x[static_cast<std::size_t>(c)] = lo + 0.5 * rng.uniform() * (spec.basis == BasisKind::cosine ? 1.0 : 2.0);
      out.X(row, c) = x[static_cast<std::size_t>(c)];
    }
    double value = 0.0;
    if (support) {
      for (std::size_t p = 0; p < support->cardinality(); ++p)
        value += eval_tensor(*support, p, x, spec.normalization);
    } else {
      value = toy_function(spec.which, spec.basis, x, spec.normalization);
    }
    out.y[row] = value >= 0 ? 1.0 : -1.0;
  }
  return out;
}

ImportanceResult importance_experiment(std::size_t N, std::uint64_t seed) {
  if (N < 1) fail(ErrorCode::invalid_argument, "sample count must be >= 1");
  const auto& support = friedman1_support();
  const double mean = friedman1_mean();
  std::vector<std::size_t> flips(support.size(), 0);
  ImportanceResult res;
  res.samples = N;
  Rng rng(seed);
  double z[5];
  for (std::size_t n = 0; n < N; ++n) {
    for (double& zi : z) zi = rng.uniform();
    const double centered = friedman1(std::span<const double>(z, 5)) - mean;
    const bool sign = centered >= 0;
    if (sign) ++res.positives;
    for (std::size_t s = 0; s < support.size(); ++s) {
      const auto& dims = support[s].dims();
      double xu[2];
      for (std::size_t i = 0; i < dims.size(); ++i) xu[i] = z[dims[i] - 1];
      const double term = friedman1_anova_term(support[s], std::span<const double>(xu, dims.size()));
      if ((centered - term >= 0) != sign) ++flips[s];
    }
  }
  for (std::size_t s = 0; s < support.size(); ++s)
    res.entries.push_back({support[s], 100.0 * static_cast<double>(flips[s]) / static_cast<double>(N)});
  return res;
}

}  // namespace anovasvm
