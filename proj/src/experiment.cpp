#include "bayesun/experiment.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "bayesun/rng.hpp"

namespace bayesun::experiment {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

DiagGaussian Scenario::prior() const {
  const auto p = architecture().param_count();
  return DiagGaussian(Vector::Zero(p), Vector::Constant(p, 1.0 / prior_precision));
}

bool Scenario::in_retain_region(double x) const {
  return retain_regions[0].contains(x) || retain_regions[1].contains(x);
}

namespace {

bool overlaps(const Interval& a, const Interval& b) {
  const bool touching = (a.hi == b.lo || b.hi == a.lo) && !(a.closed && b.closed);
  return !(a.hi < b.lo || b.hi < a.lo || touching);
}

}  // namespace

void Scenario::validate() const {
  if (n_delete < 0 || n_total <= n_delete) throw std::invalid_argument("Scenario: need 0 <= n_delete < n_total");
  if ((n_total - n_delete) % 2 != 0) {
    throw std::invalid_argument("Scenario: retained count must split evenly over the two regions");
  }
  for (const auto& r : retain_regions) {
    if (!(r.hi > r.lo)) throw std::invalid_argument("Scenario: empty retain region");
  }
  if (!(delete_region.hi > delete_region.lo)) throw std::invalid_argument("Scenario: empty delete region");
  if (overlaps(retain_regions[0], retain_regions[1]) || overlaps(retain_regions[0], delete_region) ||
      overlaps(retain_regions[1], delete_region)) {
    throw std::invalid_argument("Scenario: regions must be disjoint");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("Scenario: sigma must be > 0");
  if (grid.empty()) throw std::invalid_argument("Scenario: empty grid");
  if (hidden_units < 0) throw std::invalid_argument("Scenario: hidden_units must be >= 0");
  if (!(prior_precision > 0.0)) throw std::invalid_argument("Scenario: prior_precision must be > 0");
  if (predictive_samples < 2) throw std::invalid_argument("Scenario: predictive_samples must be >= 2");
  laplace_optimizer.validate();
  vi_optimizer.validate();
}

SplitData gen_sine_data(const Scenario& s) {
  if (!(s.sigma >= 0.0)) throw std::invalid_argument("gen_sine_data: sigma must be >= 0");
  if (s.n_delete < 0 || s.n_total <= s.n_delete || (s.n_total - s.n_delete) % 2 != 0) {
    throw std::invalid_argument("gen_sine_data: invalid split counts");
  }
  Rng rng(derive_seed(s.seed, streams::data));
  const int per_region = (s.n_total - s.n_delete) / 2;
  auto draw = [&](const Interval& r, int n, std::vector<double>& xs) {
    for (int i = 0; i < n; ++i) {
      double x = rng.uniform(r.lo, r.hi);
      // Open intervals exclude the endpoints; uniform() already excludes hi.
      while (!r.contains(x)) x = rng.uniform(r.lo, r.hi);
      xs.push_back(x);
    }
  };
  std::vector<double> ret_x;
  std::vector<double> del_x;
  draw(s.retain_regions[0], per_region, ret_x);
  draw(s.retain_regions[1], per_region, ret_x);
  draw(s.delete_region, s.n_delete, del_x);
  auto targets = [&](const std::vector<double>& xs) {
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) ys.push_back(std::sin(x) + s.sigma * rng.normal());
    return ys;
  };
  auto ret_y = targets(ret_x);
  auto del_y = targets(del_x);
  SplitData out;
  out.ret = Dataset(std::move(ret_x), std::move(ret_y), s.sigma);
  out.del = Dataset(std::move(del_x), std::move(del_y), s.sigma);
  out.all = concat(out.ret, out.del);
  return out;
}

PredictiveTable posterior_predictive(const MlpArchitecture& arch, const DiagGaussian& posterior,
                                     const std::vector<double>& grid, double sigma,
                                     const laplace::PredictMode& mode) {
  return laplace::predict(arch, posterior, grid, sigma, mode);
}

std::string to_string(PredictiveKind k) { return k == PredictiveKind::mc ? "mc" : "linearized"; }

PredictiveKind parse_predictive_kind(const std::string& s) {
  if (s == "mc") return PredictiveKind::mc;
  if (s == "linearized") return PredictiveKind::linearized;
  throw std::invalid_argument("unknown predictive kind '" + s + "'");
}

bool ComparisonMetrics::all_finite() const {
  for (double v : {kl_to_baseline, mean_shift_on_grid, avg_std_deleted_region, avg_std_retained_region,
                   reference_avg_std_deleted_region, reference_avg_std_retained_region, rmse_retained}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

RegionStd region_std(const PredictiveTable& t, const Scenario& s) {
  RegionStd r;
  int nd = 0;
  int nr = 0;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    if (s.delete_region.contains(t.x[i])) {
      r.deleted += t.std_epistemic[i];
      ++nd;
    } else if (s.in_retain_region(t.x[i])) {
      r.retained += t.std_epistemic[i];
      ++nr;
    }
  }
  r.deleted = nd > 0 ? r.deleted / nd : std::numeric_limits<double>::quiet_NaN();
  r.retained = nr > 0 ? r.retained / nr : std::numeric_limits<double>::quiet_NaN();
  return r;
}

ComparisonMetrics compare_predictives(const DiagGaussian& a, const PredictiveTable& pa,
                                      const DiagGaussian& b, const PredictiveTable& pb,
                                      const Scenario& s) {
  if (a.dim() != b.dim()) throw DimensionError("compare_posteriors: parameter dimensions differ");
  if (pa.x != pb.x) throw DimensionError("compare_posteriors: predictive grids differ");
  ComparisonMetrics m;
  m.kl_to_baseline = kl_divergence(a, b);
  double ss = 0.0;
  int nr = 0;
  for (std::size_t i = 0; i < pa.x.size(); ++i) {
    const double d = pa.mean[i] - pb.mean[i];
    m.mean_shift_on_grid = std::max(m.mean_shift_on_grid, std::abs(d));
    if (s.in_retain_region(pa.x[i])) {
      ss += d * d;
      ++nr;
    }
  }
  m.rmse_retained = nr > 0 ? std::sqrt(ss / nr) : 0.0;
  const auto ra = region_std(pa, s);
  const auto rb = region_std(pb, s);
  m.avg_std_deleted_region = ra.deleted;
  m.avg_std_retained_region = ra.retained;
  m.reference_avg_std_deleted_region = rb.deleted;
  m.reference_avg_std_retained_region = rb.retained;
  return m;
}

namespace {

laplace::PredictMode predict_mode(const ComparisonOptions& o, const DiagGaussian& g) {
  if (o.predictive == PredictiveKind::linearized) return laplace::LinearizedMode{g.mean()};
  return laplace::McMode{o.samples, o.seed};
}

}  // namespace

ComparisonMetrics compare_posteriors(const MlpArchitecture& arch, const DiagGaussian& a,
                                     const DiagGaussian& b, const Scenario& s,
                                     const ComparisonOptions& opts) {
  if (a.dim() != b.dim() || a.dim() != arch.param_count()) {
    throw DimensionError("compare_posteriors: parameter dimensions differ");
  }
  const auto pa = posterior_predictive(arch, a, s.grid, s.sigma, predict_mode(opts, a));
  const auto pb = posterior_predictive(arch, b, s.grid, s.sigma, predict_mode(opts, b));
  return compare_predictives(a, pa, b, pb, s);
}

std::string to_string(Method m) { return m == Method::laplace ? "laplace" : "vi"; }

std::string to_string(UnlearnerKind u) {
  switch (u) {
    case UnlearnerKind::lbun:
      return "lbun";
    case UnlearnerKind::vbun:
      return "vbun";
    case UnlearnerKind::retrain:
      return "retrain";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "laplace") return Method::laplace;
  if (s == "vi") return Method::vi;
  throw std::invalid_argument("unknown method '" + s + "' (expected laplace or vi)");
}

UnlearnerKind parse_unlearner(const std::string& s) {
  if (s == "lbun") return UnlearnerKind::lbun;
  if (s == "vbun") return UnlearnerKind::vbun;
  if (s == "retrain") return UnlearnerKind::retrain;
  throw std::invalid_argument("unknown unlearner '" + s + "' (expected lbun, vbun or retrain)");
}

ComparisonOptions comparison_options(Method m, const Scenario& s) {
  ComparisonOptions o;
  o.predictive = m == Method::laplace ? PredictiveKind::linearized : PredictiveKind::mc;
  o.samples = s.predictive_samples;
  o.seed = derive_seed(s.seed, streams::predictive);
  return o;
}

std::vector<double> UnlearnerConfig::default_lambdas(UnlearnerKind k) {
  switch (k) {
    case UnlearnerKind::lbun:
      return {1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    case UnlearnerKind::vbun:
      return {0.01, 0.1, 0.5, 0.9};
    case UnlearnerKind::retrain:
      return {0.0};
  }
  return {};
}

TrainedPosterior train(Method m, const Dataset& data, const Scenario& s) {
  const auto arch = s.architecture();
  TrainedPosterior out{m, s.prior(), {}, 0.0};
  if (m == Method::laplace) {
    auto cfg = s.laplace_optimizer;
    cfg.seed = derive_seed(s.seed, streams::train);
    auto fit = laplace::fit_laplace(arch, data, s.prior_precision, cfg);
    out.posterior = fit.posterior;
    out.trace = std::move(fit.map.trace);
    out.final_objective = fit.map.objective;
  } else {
    auto cfg = s.vi_optimizer;
    cfg.seed = derive_seed(s.seed, streams::train);
    auto fit = vi::train_vi(arch, data, s.prior(), cfg, s.vi_options);
    out.posterior = fit.posterior;
    out.trace = std::move(fit.elbo_trace);
    out.final_objective = fit.final_elbo.value;
  }
  return out;
}

namespace {

PredictiveTable predictive_for(Method m, const MlpArchitecture& arch, const DiagGaussian& g,
                               const Scenario& s) {
  return posterior_predictive(arch, g, s.grid, s.sigma, predict_mode(comparison_options(m, s), g));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

CellResult run_cell(const Scenario& s, Method m, const SplitData& data, const TrainedPosterior& original,
                    const TrainedPosterior& baseline, const PredictiveTable& baseline_predictive,
                    const PredictiveTable& original_predictive, UnlearnerKind kind, double lambda,
                    const UnlearnerConfig& cfg) {
  const auto arch = s.architecture();
  const auto& q_all = original.posterior;
  CellResult cell;
  cell.lambda = lambda;
  std::optional<Vector> mode_theta;

  if (kind == UnlearnerKind::retrain) {
    cell.posterior = baseline.posterior;
    cell.trace = baseline.trace;
  } else if (kind == UnlearnerKind::lbun) {
    auto c = cfg.lbun;
    c.lambda = lambda;
    auto r = lbun::unlearn(arch, q_all, data.del, c);
    cell.report = r.posterior.report;
    cell.posterior = r.posterior.posterior;
    cell.trace = std::move(r.mode.trace);
    if (cell.report.kind != PathologyKind::unbounded_forgetting) {
      cell.natural = r.posterior.natural;
      cell.mode = r.mode.theta;
    }
    mode_theta = r.mode.theta;
  } else {
    auto c = cfg.vbun;
    c.lambda = lambda;
    c.optimizer.seed = derive_seed(derive_seed(s.seed, streams::unlearn), std::bit_cast<std::uint64_t>(lambda));
    auto r = vbun::train_vbun(arch, q_all, data.del, c);
    cell.posterior = r.posterior;
    cell.trace = std::move(r.eubo_trace);
  }

  const double inf = std::numeric_limits<double>::infinity();
  if (cell.posterior) {
    // Laplace-family results are centred on their own mode, so `m` picks the predictive.
    const auto pred = kind == UnlearnerKind::retrain ? baseline_predictive
                                                     : predictive_for(m, arch, *cell.posterior, s);
    cell.vs_baseline = compare_predictives(*cell.posterior, pred, baseline.posterior, baseline_predictive, s);
    cell.vs_original = compare_predictives(*cell.posterior, pred, q_all, original_predictive, s);
    cell.mean_shift_vs_original = cell.vs_original->mean_shift_on_grid;
    cell.param_shift = (cell.posterior->mean() - q_all.mean()).norm();
    cell.kl_to_original = kl_divergence(*cell.posterior, q_all);
    cell.dissimilar_to_baseline = cell.vs_baseline->kl_to_baseline > s.dissimilarity_threshold;
    cell.predictive = pred;
  } else if (cell.report.kind == PathologyKind::unbounded_forgetting) {
    cell.mean_shift_vs_original = inf;
    cell.param_shift = inf;
    cell.kl_to_original = inf;
  } else if (mode_theta) {
    // No Gaussian, but the mode itself is a usable point estimate.
    std::vector<double> f(s.grid.size());
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      f[i] = forward(arch, as_span(*mode_theta), s.grid[i]);
    }
    cell.mean_shift_vs_original = max_abs_diff(f, original_predictive.mean);
    cell.param_shift = (*mode_theta - q_all.mean()).norm();
    cell.kl_to_original = std::numeric_limits<double>::quiet_NaN();
  }
  return cell;
}

RunArtifacts run_scenario(Method m, const UnlearnerConfig& unlearner, const Scenario& s) {
  s.validate();
  const auto arch = s.architecture();
  auto data = gen_sine_data(s);
  auto original = train(m, data.all, s);
  auto baseline = train(m, data.ret, s);
  auto original_predictive = predictive_for(m, arch, original.posterior, s);
  auto baseline_predictive = predictive_for(m, arch, baseline.posterior, s);
  RunArtifacts run{s,
                   m,
                   unlearner.kind,
                   std::move(data),
                   std::move(original),
                   std::move(baseline),
                   std::move(original_predictive),
                   std::move(baseline_predictive),
                   {}};

  auto lambdas = unlearner.lambdas;
  if (lambdas.empty()) lambdas = UnlearnerConfig::default_lambdas(unlearner.kind);
  if (unlearner.kind == UnlearnerKind::retrain) lambdas = {0.0};
  run.cells.resize(lambdas.size());
  std::vector<std::exception_ptr> errors(lambdas.size());
  // Cells are independent and each is deterministic in its own seed.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    try {
      run.cells[i] = run_cell(s, m, run.data, run.original, run.baseline, run.baseline_predictive,
                              run.original_predictive, unlearner.kind, lambdas[i], unlearner);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return run;
}

}  // namespace bayesun::experiment
