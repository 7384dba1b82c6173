#include "bayesun/lbun.hpp"

#include <cmath>
#include <sstream>

#include "bayesun/laplace.hpp"

namespace bayesun::lbun {

void LbunConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("LbunConfig: lambda must be > 0");
  if (clamp.enabled && !(clamp.epsilon > 0.0)) {
    throw std::invalid_argument("LbunConfig: clamp epsilon must be > 0");
  }
  optimizer.validate();
}

double objective(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                 double lambda, const Vector& theta, Vector& grad) {
  const Vector d = theta - q_all.mean();
  double value = lambda * log_pdf(q_all, theta);
  grad = -lambda * d.cwiseQuotient(q_all.var());
  if (!del_data.empty()) {
    const auto lg = loglik_and_grad(arch, as_span(theta), del_data);
    value -= lg.loglik;
    grad -= lg.grad;
  }
  return value;
}

ModeResult optimize_mode(const MlpArchitecture& arch, const DiagGaussian& q_all,
                         const Dataset& del_data, const LbunConfig& cfg) {
  cfg.validate();
  if (q_all.dim() != arch.param_count()) throw DimensionError("lbun: q_all dimension");
  const double lambda = cfg.lambda;
  Objective obj = [&](const Vector& theta, Vector& grad, int) {
    return objective(arch, q_all, del_data, lambda, theta, grad);
  };

  ModeResult out;
  out.theta = q_all.mean();
  AscentStatus status = AscentStatus::completed;
  if (cfg.optimizer.iterations > 0) {
    auto first = gradient_ascent(obj, out.theta, cfg.optimizer, cfg.objective_bound);
    out.theta = first.x;
    out.trace = std::move(first.trace);
    out.final_grad_norm = first.final_grad_norm;
    status = first.status;
  }
  if (status == AscentStatus::completed && cfg.optimizer.polish_iterations > 0) {
    const Vector retention = lambda * q_all.var().cwiseInverse();
    Curvature curvature = [&](const Vector& theta) {
      Matrix c = -laplace::ggn_full(arch, as_span(theta), del_data);
      c.diagonal() += retention;
      return c;
    };
    auto polish = levenberg_marquardt(obj, curvature, out.theta, cfg.optimizer.polish_iterations,
                                      cfg.objective_bound);
    out.theta = polish.x;
    const auto skip = out.trace.empty() ? 0 : 1;
    out.trace.insert(out.trace.end(), polish.trace.begin() + skip, polish.trace.end());
    out.final_grad_norm = polish.final_grad_norm;
    status = polish.status;
  }
  if (status == AscentStatus::bound_exceeded) {
    PathologyReport r;
    r.kind = PathologyKind::unbounded_forgetting;
    std::ostringstream os;
    os.precision(17);
    os << "objective exceeded bound " << cfg.objective_bound << " (value "
       << (out.trace.empty() ? 0.0 : out.trace.back()) << ", lambda " << lambda << ")";
    r.detail = os.str();
    out.failure = std::move(r);
  }
  return out;
}

LbunPosterior build_posterior(const MlpArchitecture& arch, const DiagGaussian& q_all,
                              const Vector& theta_lbun, const Dataset& del_data,
                              const LbunConfig& cfg) {
  cfg.validate();
  if (q_all.dim() != arch.param_count()) throw DimensionError("lbun: q_all dimension");
  arch.check(as_span(theta_lbun));
  const Vector ggn = laplace::ggn_diagonal(arch, as_span(theta_lbun), del_data);
  Vector prec = cfg.lambda * q_all.var().cwiseInverse() - ggn;
  NaturalGaussian natural{prec, prec.cwiseProduct(theta_lbun)};
  const auto cls = classify_precision(natural);
  LbunPosterior out{natural, cls, std::nullopt, report_from_precision(natural, cls)};
  if (cls.is_pd()) {
    // v / (lambda - g v) rather than 1 / prec: exact when the deleted set is empty.
    const Vector& v = q_all.var();
    Vector var = v.array() / (cfg.lambda - ggn.array() * v.array());
    out.posterior = DiagGaussian(theta_lbun, std::move(var));
  } else if (cfg.clamp.enabled) {
    const auto offending = out.report.offending_coords;
    Vector floored = prec.cwiseMax(cfg.clamp.epsilon);
    out.posterior = DiagGaussian(theta_lbun, floored.cwiseInverse());
    out.report.kind = PathologyKind::clamped;
    out.report.detail += "; floored at " + std::to_string(cfg.clamp.epsilon);
    out.report.offending_coords = offending;
  }
  return out;
}

LbunResult unlearn(const MlpArchitecture& arch, const DiagGaussian& q_all, const Dataset& del_data,
                   const LbunConfig& cfg) {
  auto mode = optimize_mode(arch, q_all, del_data, cfg);
  auto post = build_posterior(arch, q_all, mode.theta, del_data, cfg);
  if (mode.failure) {
    post.posterior.reset();
    post.report = *mode.failure;
  }
  return {std::move(mode), std::move(post)};
}

}  // namespace bayesun::lbun
