#include "bayesun/pathology.hpp"

#include <cmath>
#include <sstream>

#include "bayesun/rng.hpp"

namespace bayesun {

std::string to_string(PathologyKind k) {
  switch (k) {
    case PathologyKind::valid:
      return "VALID";
    case PathologyKind::non_normalizable:
      return "NON_NORMALIZABLE";
    case PathologyKind::indefinite_precision:
      return "INDEFINITE_PRECISION";
    case PathologyKind::singular_precision:
      return "SINGULAR_PRECISION";
    case PathologyKind::clamped:
      return "CLAMPED";
    case PathologyKind::unbounded_forgetting:
      return "UNBOUNDED_FORGETTING";
  }
  return "UNKNOWN";
}

PathologyKind parse_pathology_kind(const std::string& s) {
  for (auto k : {PathologyKind::valid, PathologyKind::non_normalizable,
                 PathologyKind::indefinite_precision, PathologyKind::singular_precision,
                 PathologyKind::clamped, PathologyKind::unbounded_forgetting}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown pathology kind '" + s + "'");
}

PathologyReport report_from_precision(const NaturalGaussian& n, const DefinitenessClass& cls) {
  PathologyReport r;
  r.min_eigenvalue = cls.min_eigenvalue;
  if (cls.is_pd()) return r;
  r.kind = cls.kind == Definiteness::singular ? PathologyKind::singular_precision
                                              : PathologyKind::indefinite_precision;
  if (n.is_diagonal()) {
    const Vector& d = n.precision_diag();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] <= kDefinitenessTol) r.offending_coords.push_back(static_cast<std::size_t>(i));
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << "precision is " << to_string(cls.kind) << " with minimum eigenvalue " << cls.min_eigenvalue;
  if (!r.offending_coords.empty()) os << " at " << r.offending_coords.size() << " coordinate(s)";
  r.detail = os.str();
  return r;
}

namespace pathology {

std::array<double, 5> ScalarDensity::total_coeffs() const {
  auto c = coeffs;
  for (const auto& f : factors) {
    const double s = static_cast<double>(f.sign) * f.weight;
    c[2] -= s;
    c[1] += 2.0 * s * f.center;
    c[0] -= s * f.center * f.center;
  }
  return c;
}

double ScalarDensity::log_density(double theta) const {
  const auto c = total_coeffs();
  return (((c[4] * theta + c[3]) * theta + c[2]) * theta + c[1]) * theta + c[0];
}

PathologyReport tail_classify_1d(const ScalarDensity& density) {
  const auto c = density.total_coeffs();
  for (double v : c) {
    if (!std::isfinite(v)) throw std::invalid_argument("tail_classify_1d: non-finite coefficient");
  }
  int lead = 0;
  for (int k = 4; k >= 0; --k) {
    if (c[static_cast<std::size_t>(k)] != 0.0) {
      lead = k;
      break;
    }
  }
  if (lead % 2 == 1) {
    throw std::invalid_argument("tail_classify_1d: leading term has odd degree " + std::to_string(lead));
  }
  PathologyReport r;
  const double lc = c[static_cast<std::size_t>(lead)];
  std::ostringstream os;
  os.precision(17);
  os << "leading coefficient of theta^" << lead << " is " << lc;
  if (lead == 0 || lc >= 0.0) {
    r.kind = PathologyKind::non_normalizable;
    os << "; tails do not decay";
  } else {
    os << "; tails decay";
  }
  r.detail = os.str();
  return r;
}

namespace {

/// log of the trapezoid integral of exp(f) on [lo, hi]; nullopt for non-finite samples.
std::optional<double> log_trapezoid(const ScalarDensity& d, double lo, double hi, double step) {
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  if (n < 1) throw std::invalid_argument("numeric_log_normalizer: interval shorter than step");
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> vals(static_cast<std::size_t>(n) + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (long i = 0; i <= n; ++i) {
    const double v = d.log_density(lo + h * static_cast<double>(i));
    if (!std::isfinite(v)) return std::nullopt;
    vals[static_cast<std::size_t>(i)] = v;
    peak = std::max(peak, v);
  }
  double sum = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * std::exp(vals[static_cast<std::size_t>(i)] - peak);
  }
  return peak + std::log(sum * h);
}

}  // namespace

NormalizerResult numeric_log_normalizer(const ScalarDensity& density, double lo, double hi,
                                        double step) {
  if (!(step > 0.0)) throw std::invalid_argument("numeric_log_normalizer: step must be > 0");
  if (!(hi > lo)) throw std::invalid_argument("numeric_log_normalizer: empty interval");
  NormalizerResult r;
  const auto base = log_trapezoid(density, lo, hi, step);
  const double center = 0.5 * (lo + hi);
  const double width = hi - lo;
  const auto wide = log_trapezoid(density, center - width, center + width, step);
  if (!base || !wide) {
    r.non_finite = true;
    return r;
  }
  r.log_integral_base = *base;
  r.log_integral_wide = *wide;
  const double rel_change = std::expm1(*wide - *base);
  if (!std::isfinite(rel_change) || std::abs(rel_change) > 0.01) {
    r.divergent = true;
  } else {
    r.log_normalizer = *base;
  }
  return r;
}

namespace {

double derivative(const std::array<double, 5>& c, double t) {
  return ((4.0 * c[4] * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
}

double second_derivative(const std::array<double, 5>& c, double t) {
  return (12.0 * c[4] * t + 6.0 * c[3]) * t + 2.0 * c[2];
}

}  // namespace

QuarticDemo quartic_demo() { return quartic_demo(GaussianFactor{1.0, 1.0, -1}); }

QuarticDemo quartic_demo(const GaussianFactor& removed) {
  ScalarDensity posterior;
  posterior.coeffs = {0.0, 0.0, 1.5, 0.0, -1.0};
  posterior.factors = {{1.0, -1.0, 1}, {1.0, 1.0, 1}};
  const auto c = posterior.total_coeffs();

  // Mode by bisection on the derivative over [-5, 5].
  double lo = -5.0;
  double hi = 5.0;
  double mode = 0.0;
  for (int it = 0; it < 200; ++it) {
    mode = 0.5 * (lo + hi);
    const double d = derivative(c, mode);
    if (d == 0.0) break;
    (d > 0.0 ? lo : hi) = mode;
  }
  const double curvature = second_derivative(c, mode);
  if (!(curvature < 0.0)) throw std::logic_error("quartic_demo: mode is not a maximum");
  const double var = -1.0 / curvature;

  ScalarDensity after;
  after.coeffs = {-mode * mode / (2.0 * var), mode / var, -1.0 / (2.0 * var), 0.0, 0.0};
  GaussianFactor divided = removed;
  divided.sign = -1;
  after.factors = {divided};

  QuarticDemo demo{mode, DiagGaussian(Vector::Constant(1, mode), Vector::Constant(1, var)), after,
                   tail_classify_1d(after), numeric_log_normalizer(after, -10.0, 10.0, 1e-3)};
  return demo;
}

BlrDemo blr_unobserved_demo() {
  const auto features = blr::FeatureMap::bias_linear();
  const double sigma = 0.5;
  Rng rng(2022);
  const std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(0.3 + 0.7 * x + sigma * rng.normal());
  const Dataset observed(xs, ys, sigma);

  FullGaussian prior(Vector::Zero(2), Matrix::Identity(2, 2));
  const FullGaussian posterior = blr::fit(prior, observed, features);

  // (a) delete every observation.
  auto all = blr::unlearn(posterior, observed, features);
  if (!all.posterior) throw std::logic_error("blr demo: full deletion lost positive definiteness");
  const double err = std::max((all.posterior->mean() - prior.mean()).cwiseAbs().maxCoeff(),
                              (all.posterior->cov() - prior.cov()).cwiseAbs().maxCoeff());

  // (b) delete an in-range point that was never observed, with an implausible target.
  const double near_x = 0.25;
  const double near_y = 3.0;
  auto near = blr::unlearn(posterior, Dataset({near_x}, {near_y}, sigma), features);
  if (!near.posterior) throw std::logic_error("blr demo: near deletion lost positive definiteness");
  PathologyReport near_report = report_from_precision(near.natural, near.definiteness);

  // (c) walk outward from the data range until the downdated precision breaks.
  double far_x = observed.x.back();
  double far_y = features.features(far_x).dot(posterior.mean());
  blr::UnlearnResult far = blr::unlearn(posterior, Dataset({far_x}, {far_y}, sigma), features);
  for (int step = 0; step < 400 && far.definiteness.is_pd(); ++step) {
    far_x += 0.25;
    far_y = features.features(far_x).dot(posterior.mean());
    far = blr::unlearn(posterior, Dataset({far_x}, {far_y}, sigma), features);
  }

  BlrDemo demo{prior,
               posterior,
               observed,
               *all.posterior,
               err,
               near_x,
               near_y,
               *near.posterior,
               near_report,
               kl_divergence(*near.posterior, prior),
               kl_divergence(*near.posterior, posterior),
               far_x,
               far_y,
               report_from_precision(far.natural, far.definiteness)};
  return demo;
}

}  // namespace pathology
}  // namespace bayesun
