#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "anovasvm/transform.hpp"

namespace anovasvm {

enum class RegKind { l2, l1 };

const char* reg_kind_name(RegKind kind) noexcept;
RegKind parse_reg_kind(std::string_view text);

struct RegSpec {
  RegKind kind = RegKind::l2;
  double lambda = 0.0;
};

enum class StopReason { gradient, objective_change, step_change, max_iters };

const char* stop_reason_name(StopReason reason) noexcept;

/// Snapshot handed to SolveConfig::observer after every accepted iteration.
/// Gradient descent fills `step`, `objective_before`, `grad_norm_sq`;
/// FISTA fills `lipschitz`, `extrapolated`, `q_extrapolated`, `q_coeffs`,
/// `majorizer`.
struct IterationInfo {
  std::size_t iteration = 0;
  const Vector* coeffs = nullptr;
  const Vector* extrapolated = nullptr;
  double objective = 0.0;
  double objective_before = 0.0;
  double step = 0.0;
  double grad_norm_sq = 0.0;
  double lipschitz = 0.0;
  double q_extrapolated = 0.0;
  double q_coeffs = 0.0;
  double majorizer = 0.0;
};

struct SolveConfig {
  std::size_t max_iters = 1000;
  double grad_tol = 1e-8;
  double obj_tol = 1e-8;
  double step_tol = 1e-8;
  double armijo_sigma = 1e-4;
  double armijo_shrink = 0.5;
  double armijo_initial_step = 1.0;
  int armijo_max_shrinks = 60;
  double fista_L0 = 1.0;
  double fista_theta = 2.0;
  double fista_L_max = 1e30;
  std::optional<Vector> initial_coeffs;
  std::function<void(const IterationInfo&)> observer;

  void validate() const;
};

struct SolveResult {
  Vector coeffs;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  StopReason reason = StopReason::max_iters;
  std::vector<double> trace;
};

void check_labels(const Vector& labels);

Vector margins(const FeatureTransform& t, const Vector& coeffs, const Vector& labels);
double smooth_loss(const Vector& margins);
double regularizer(const Vector& coeffs, RegKind kind);
double objective(const FeatureTransform& t, const Vector& coeffs, const Vector& labels,
                 const RegSpec& reg);

/// Gradient of the loss part q alone: -(1/M) Phi^T (y .* h'(m)).
Vector gradient_smooth(const FeatureTransform& t, const Vector& coeffs, const Vector& labels);

struct ArmijoResult {
  double step = 0.0;
  double value = 0.0;  // P at the accepted step
  int shrinks = 0;
};

/// Backtracking on a line function s -> P(x + s d): the largest s = s0 xi^n
/// with line(s) <= p0 - sigma s |grad|^2.
ArmijoResult armijo_search(const std::function<double(double)>& line, double p0,
                           double grad_norm_sq, double initial_step, const SolveConfig& cfg);

double armijo_step(const std::function<double(const Vector&)>& P, const Vector& current,
                   const Vector& direction, double p0, double grad_norm_sq, const SolveConfig& cfg);

double soft_threshold(double a, double thr) noexcept;
Vector prox_step(const Vector& h, const Vector& grad_q_at_h, double L, double lambda);

SolveResult solve_l2(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                     const SolveConfig& cfg = {});
SolveResult solve_l1(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                     const SolveConfig& cfg = {});
SolveResult solve(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                  const SolveConfig& cfg = {});

Vector decision_values(const Vector& coeffs, const FeatureTransform& t);
Vector predict_labels(const Vector& scores);

}  // namespace anovasvm
