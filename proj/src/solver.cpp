#include "anovasvm/solver.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "anovasvm/errors.hpp"

namespace anovasvm {

const char* reg_kind_name(RegKind kind) noexcept { return kind == RegKind::l2 ? "l2" : "l1"; }

RegKind parse_reg_kind(std::string_view text) {
  if (text == "l2") return RegKind::l2;
  if (text == "l1") return RegKind::l1;
  fail(ErrorCode::invalid_argument, "unknown regularizer '" + std::string(text) + "' (expected l1 or l2)");
}

const char* stop_reason_name(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::gradient: return "gradient";
    case StopReason::objective_change: return "objective-change";
    case StopReason::step_change: return "step-change";
    case StopReason::max_iters: return "max-iters";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::invalid_argument, what);
  };
  require(grad_tol >= 0 && obj_tol >= 0 && step_tol >= 0, "tolerances must be >= 0");
  require(armijo_sigma > 0 && armijo_sigma < 1, "armijo sigma must lie in (0,1)");
  require(armijo_shrink > 0 && armijo_shrink < 1, "armijo shrink factor must lie in (0,1)");
  require(armijo_initial_step > 0 && std::isfinite(armijo_initial_step), "initial step must be positive");
  require(armijo_max_shrinks >= 0, "armijo shrink limit must be >= 0");
  require(fista_L0 > 0 && std::isfinite(fista_L0), "L0 must be positive");
  require(fista_theta > 1, "theta must be > 1");
}

namespace {

constexpr double kMajorizerSlack = 1e-13;

void check_reg(const RegSpec& reg, RegKind expected) {
  if (reg.kind != expected)
    fail(ErrorCode::invalid_argument, std::string("solver expects ") + reg_kind_name(expected) +
                                          " regularization");
  if (!std::isfinite(reg.lambda) || reg.lambda < 0)
    fail(ErrorCode::invalid_argument, "lambda must be finite and >= 0");
}

double loss_from_yz(const Vector& yz) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < yz.size(); ++j) {
    const double m = 1.0 - yz[j];
    if (m > 0) sum += m * m;
  }
  return sum / static_cast<double>(yz.size());
}

// -(1/M) Phi^T (y .* h'(1 - y z)), written into grad
void smooth_gradient_from_yz(const FeatureTransform& t, const Vector& labels, const Vector& yz,
                             Vector& weights, Vector& grad) {
  const auto M = static_cast<double>(yz.size());
  weights.resize(yz.size());
  for (Eigen::Index j = 0; j < yz.size(); ++j) {
    const double m = 1.0 - yz[j];
    weights[j] = m > 0 ? -2.0 * m * labels[j] / M : 0.0;
  }
  t.apply_transpose_into(weights, grad);
}

Vector initial_point(const FeatureTransform& t, const SolveConfig& cfg) {
  if (!cfg.initial_coeffs) return Vector::Zero(t.cols());
  if (cfg.initial_coeffs->size() != t.cols())
    fail(ErrorCode::invalid_argument, "initial coefficients have the wrong length");
  return *cfg.initial_coeffs;
}

void check_finite(double value, std::size_t iteration) {
  if (!std::isfinite(value))
    fail(ErrorCode::numeric_failure, "non-finite objective at iteration " + std::to_string(iteration));
}

}  // namespace

void check_labels(const Vector& labels) {
  for (Eigen::Index j = 0; j < labels.size(); ++j)
    if (labels[j] != 1.0 && labels[j] != -1.0)
      fail(ErrorCode::invalid_argument, "label at row " + std::to_string(j) + " is not +1 or -1");
}

Vector margins(const FeatureTransform& t, const Vector& coeffs, const Vector& labels) {
  if (labels.size() != t.rows())
    fail(ErrorCode::invalid_argument, "label vector length does not match the number of points");
  check_labels(labels);
  return (1.0 - (labels.array() * t.apply(coeffs).array())).matrix();
}

double smooth_loss(const Vector& m) {
  if (m.size() == 0) fail(ErrorCode::invalid_argument, "empty margin vector");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m.size(); ++j)
    if (m[j] > 0) sum += m[j] * m[j];
  return sum / static_cast<double>(m.size());
}

double regularizer(const Vector& coeffs, RegKind kind) {
  return kind == RegKind::l2 ? coeffs.squaredNorm() : coeffs.lpNorm<1>();
}

double objective(const FeatureTransform& t, const Vector& coeffs, const Vector& labels,
                 const RegSpec& reg) {
  return reg.lambda * regularizer(coeffs, reg.kind) + smooth_loss(margins(t, coeffs, labels));
}

Vector gradient_smooth(const FeatureTransform& t, const Vector& coeffs, const Vector& labels) {
  const Vector m = margins(t, coeffs, labels);
  const Vector yz = (1.0 - m.array()).matrix();
  Vector weights, grad;
  smooth_gradient_from_yz(t, labels, yz, weights, grad);
  return grad;
}

ArmijoResult armijo_search(const std::function<double(double)>& line, double p0,
                           double grad_norm_sq, double initial_step, const SolveConfig& cfg) {
  ArmijoResult r;
  r.step = initial_step;
  r.value = line(r.step);
  // negated form so that a NaN trial value is rejected as well
  while (!(r.value <= p0 - cfg.armijo_sigma * r.step * grad_norm_sq)) {
    if (++r.shrinks > cfg.armijo_max_shrinks)
      fail(ErrorCode::step_failure, "armijo backtracking exceeded " +
                                        std::to_string(cfg.armijo_max_shrinks) + " reductions");
    r.step *= cfg.armijo_shrink;
    r.value = line(r.step);
  }
  return r;
}

double armijo_step(const std::function<double(const Vector&)>& P, const Vector& current,
                   const Vector& direction, double p0, double grad_norm_sq, const SolveConfig& cfg) {
  const auto line = [&](double s) { return P(current + s * direction); };
  return armijo_search(line, p0, grad_norm_sq, cfg.armijo_initial_step, cfg).step;
}

double soft_threshold(double a, double thr) noexcept {
  const double shrunk = std::abs(a) - thr;
  if (shrunk <= 0) return 0.0;
  return a > 0 ? shrunk : -shrunk;
}

Vector prox_step(const Vector& h, const Vector& grad_q_at_h, double L, double lambda) {
  if (!(L > 0)) fail(ErrorCode::invalid_argument, "L must be positive");
  if (h.size() != grad_q_at_h.size()) fail(ErrorCode::invalid_argument, "length mismatch");
  Vector out(h.size());
  const double thr = lambda / L;
  for (Eigen::Index i = 0; i < h.size(); ++i) out[i] = soft_threshold(h[i] - grad_q_at_h[i] / L, thr);
  return out;
}

SolveResult solve_l2(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                     const SolveConfig& cfg) {
  check_reg(reg, RegKind::l2);
  cfg.validate();
  if (labels.size() != t.rows())
    fail(ErrorCode::invalid_argument, "label vector length does not match the number of points");
  check_labels(labels);
  const double lambda = reg.lambda;

  SolveResult res;
  Vector f = initial_point(t, cfg);
  Vector yz = labels.cwiseProduct(t.apply(f));
  double P = lambda * f.squaredNorm() + loss_from_yz(yz);
  check_finite(P, 0);
  res.trace.push_back(P);

  Vector weights, grad(t.cols()), dir(t.cols()), phid(t.rows()), yw(t.rows());
  double s0 = cfg.armijo_initial_step;
  std::size_t k = 0;
  for (; k < cfg.max_iters; ++k) {
    smooth_gradient_from_yz(t, labels, yz, weights, grad);
    grad.noalias() += 2.0 * lambda * f;
    const double gn2 = grad.squaredNorm();
    if (std::sqrt(gn2) < cfg.grad_tol) {
      res.reason = StopReason::gradient;
      res.converged = true;
      break;
    }
    dir = -grad;
    t.apply_into(dir, phid);
    yw = labels.cwiseProduct(phid);
    const double ff = f.squaredNorm(), fd = f.dot(dir), dd = gn2;
    const auto M = static_cast<double>(yz.size());
    const auto line = [&](double s) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < yz.size(); ++j) {
        const double m = 1.0 - yz[j] - s * yw[j];
        if (m > 0) sum += m * m;
      }
      return lambda * (ff + 2.0 * s * fd + s * s * dd) + sum / M;
    };

    ArmijoResult step;
    try {
      step = armijo_search(line, P, gn2, s0, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::step_failure) throw;
      res.reason = StopReason::step_change;
      break;
    }
    check_finite(step.value, k + 1);
    const double before = P;
    f.noalias() += step.step * dir;
    yz.noalias() += step.step * yw;
    P = step.value;
    res.trace.push_back(P);
    s0 = 2.0 * step.step;
    if (cfg.observer) {
      IterationInfo info;
      info.iteration = k + 1;
      info.coeffs = &f;
      info.objective = P;
      info.objective_before = before;
      info.step = step.step;
      info.grad_norm_sq = gn2;
      cfg.observer(info);
    }
  }
  if (k == cfg.max_iters) res.reason = StopReason::max_iters;
  res.iterations = res.trace.size() - 1;
  res.objective = P;
  res.coeffs = std::move(f);
  return res;
}

SolveResult solve_l1(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                     const SolveConfig& cfg) {
  check_reg(reg, RegKind::l1);
  cfg.validate();
  if (labels.size() != t.rows())
    fail(ErrorCode::invalid_argument, "label vector length does not match the number of points");
  check_labels(labels);
  const double lambda = reg.lambda;

  SolveResult res;
  Vector f = initial_point(t, cfg);
  Vector f_prev = f;
  Vector yf = labels.cwiseProduct(t.apply(f));
  Vector yf_prev = yf;
  double P = lambda * f.lpNorm<1>() + loss_from_yz(yf);
  check_finite(P, 0);
  res.trace.push_back(P);

  double tk = 1.0;
  double L = cfg.fista_L0;
  Vector h, yh, weights, gh(t.cols()), p(t.cols()), zp(t.rows()), yp(t.rows()), diff;
  std::size_t k = 0;
  for (; k < cfg.max_iters; ++k) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    const double beta = (tk - 1.0) / t_next;
    h = f + beta * (f - f_prev);
    yh = yf + beta * (yf - yf_prev);
    const double qh = loss_from_yz(yh);
    smooth_gradient_from_yz(t, labels, yh, weights, gh);

    double qp = 0.0, Q = 0.0;
    for (;;) {
      const double thr = lambda / L;
      for (Eigen::Index i = 0; i < h.size(); ++i) p[i] = soft_threshold(h[i] - gh[i] / L, thr);
      t.apply_into(p, zp);
      yp = labels.cwiseProduct(zp);
      qp = loss_from_yz(yp);
      diff = p - h;
      Q = qh + diff.dot(gh) + 0.5 * L * diff.squaredNorm();
      if (!std::isfinite(qp) || !std::isfinite(Q))
        fail(ErrorCode::numeric_failure, "non-finite values at iteration " + std::to_string(k + 1));
      // slack absorbs rounding once the iterates stop moving
      if (qp <= Q + kMajorizerSlack * (1.0 + std::abs(qh))) break;
      L *= cfg.fista_theta;
      if (L > cfg.fista_L_max) {
        std::ostringstream msg;
        msg << "backtracking constant exceeded " << cfg.fista_L_max << " at iteration " << k + 1;
        fail(ErrorCode::step_failure, msg.str());
      }
    }

    f_prev.swap(f);
    f = p;
    yf_prev.swap(yf);
    yf = yp;
    tk = t_next;
    const double P_new = lambda * f.lpNorm<1>() + qp;
    check_finite(P_new, k + 1);
    res.trace.push_back(P_new);
    if (cfg.observer) {
      IterationInfo info;
      info.iteration = k + 1;
      info.coeffs = &f;
      info.extrapolated = &h;
      info.objective = P_new;
      info.objective_before = P;
      info.lipschitz = L;
      info.q_extrapolated = qh;
      info.q_coeffs = qp;
      info.majorizer = Q;
      cfg.observer(info);
    }
    const double change = std::abs(P_new - P);
    P = P_new;
    if (change < cfg.obj_tol) {
      res.reason = StopReason::objective_change;
      res.converged = true;
      ++k;
      break;
    }
    if ((f - f_prev).norm() < cfg.step_tol) {
      res.reason = StopReason::step_change;
      res.converged = true;
      ++k;
      break;
    }
  }
  if (!res.converged) res.reason = StopReason::max_iters;
  res.iterations = res.trace.size() - 1;
  res.objective = P;
  res.coeffs = std::move(f);
  return res;
}

SolveResult solve(const FeatureTransform& t, const Vector& labels, const RegSpec& reg,
                  const SolveConfig& cfg) {
  return reg.kind == RegKind::l2 ? solve_l2(t, labels, reg, cfg) : solve_l1(t, labels, reg, cfg);
}

Vector decision_values(const Vector& coeffs, const FeatureTransform& t) { return t.apply(coeffs); }

Vector predict_labels(const Vector& scores) {
  Vector out(scores.size());
  for (Eigen::Index j = 0; j < scores.size(); ++j) out[j] = scores[j] >= 0 ? 1.0 : -1.0;
  return out;
}

}  // namespace anovasvm
