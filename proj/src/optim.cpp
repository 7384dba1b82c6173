#include "bayesun/optim.hpp"

#include <cmath>
#include <numbers>

namespace bayesun {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "momentum"; }

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "momentum") return OptimizerKind::momentum;
  throw std::invalid_argument("unknown optimizer kind '" + s + "'");
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("OptimizerConfig: step_size must be > 0");
  if (iterations < 0) throw std::invalid_argument("OptimizerConfig: iterations must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("OptimizerConfig: momentum must lie in [0, 1)");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("OptimizerConfig: init_scale must be > 0");
  if (!(final_step_fraction > 0.0 && final_step_fraction <= 1.0)) {
    throw std::invalid_argument("OptimizerConfig: final_step_fraction must lie in (0, 1]");
  }
  if (polish_iterations < 0) throw std::invalid_argument("OptimizerConfig: polish_iterations < 0");
}

namespace {

void require_finite(double value, const Vector& grad, int iter) {
  if (!std::isfinite(value) || !grad.allFinite()) {
    throw OptimizationError("non-finite objective or gradient at iteration " + std::to_string(iter) +
                            " (value " + std::to_string(value) + ")");
  }
}

double scheduled_step(const OptimizerConfig& cfg, int t) {
  if (cfg.final_step_fraction == 1.0 || cfg.iterations <= 1) return cfg.step_size;
  const double progress = static_cast<double>(t) / static_cast<double>(cfg.iterations - 1);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return cfg.step_size * (cfg.final_step_fraction + (1.0 - cfg.final_step_fraction) * cosine);
}

}  // namespace

AscentResult gradient_ascent(const Objective& objective, Vector x0, const OptimizerConfig& cfg,
                             std::optional<double> value_bound) {
  cfg.validate();
  AscentResult res;
  res.x = std::move(x0);
  const auto p = res.x.size();
  Vector grad(p);
  Vector m = Vector::Zero(p);
  Vector v = Vector::Zero(p);
  constexpr double beta2 = 0.999;
  constexpr double adam_eps = 1e-8;
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  res.trace.reserve(static_cast<std::size_t>(cfg.iterations) + 1);

  double value = 0.0;
  for (int t = 0; t <= cfg.iterations; ++t) {
    grad.setZero();
    value = objective(res.x, grad, t);
    require_finite(value, grad, t);
    res.trace.push_back(value);
    if (value_bound && value > *value_bound) {
      res.status = AscentStatus::bound_exceeded;
      break;
    }
    if (t == cfg.iterations) break;
    const double lr = scheduled_step(cfg, t);
    if (cfg.kind == OptimizerKind::adam) {
      b1_pow *= cfg.momentum;
      b2_pow *= beta2;
      m = cfg.momentum * m + (1.0 - cfg.momentum) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
      const double c1 = 1.0 - b1_pow;
      const double c2 = 1.0 - b2_pow;
      res.x.array() += lr * (m.array() / c1) / ((v.array() / c2).sqrt() + adam_eps);
    } else {
      m = cfg.momentum * m + grad;
      res.x += lr * m;
    }
    res.iterations_run = t + 1;
  }
  res.final_value = value;
  res.final_grad_norm = grad.norm();
  return res;
}

AscentResult levenberg_marquardt(const Objective& objective, const Curvature& curvature, Vector x0,
                                 int max_iterations, std::optional<double> value_bound) {
  AscentResult res;
  res.x = std::move(x0);
  const auto p = res.x.size();
  Vector grad(p);
  Vector trial_grad(p);
  grad.setZero();
  double value = objective(res.x, grad, 0);
  require_finite(value, grad, 0);
  res.trace.push_back(value);
  double mu = -1.0;

  for (int it = 0; it < max_iterations; ++it) {
    if (value_bound && value > *value_bound) {
      res.status = AscentStatus::bound_exceeded;
      break;
    }
    if (grad.norm() <= 1e-11 * (1.0 + std::abs(value))) break;
    const Matrix c = curvature(res.x);
    const double scale = std::max(1.0, c.diagonal().cwiseAbs().maxCoeff());
    if (mu < 0.0) mu = 1e-12 * scale;
    bool accepted = false;
    while (mu < 1e16 * scale) {
      Matrix a = c;
      a.diagonal().array() += mu;
      Eigen::LLT<Matrix> llt(a);
      if (llt.info() != Eigen::Success) {
        mu = std::max(mu * 10.0, 1e-10 * scale);
        continue;
      }
      const Vector step = llt.solve(grad);
      const Vector trial = res.x + step;
      trial_grad.setZero();
      const double trial_value = objective(trial, trial_grad, 0);
      if (std::isfinite(trial_value) && trial_grad.allFinite() && trial_value > value) {
        res.x = trial;
        value = trial_value;
        grad = trial_grad;
        res.trace.push_back(value);
        mu = std::max(mu / 10.0, 1e-15 * scale);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    res.iterations_run = it + 1;
    if (!accepted) break;
  }
  if (value_bound && value > *value_bound) res.status = AscentStatus::bound_exceeded;
  res.final_value = value;
  res.final_grad_norm = grad.norm();
  return res;
}

}  // namespace bayesun
