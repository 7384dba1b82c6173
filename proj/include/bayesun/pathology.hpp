#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bayesun/blr.hpp"
#include "bayesun/gaussian.hpp"

namespace bayesun {

enum class PathologyKind {
  valid,
  non_normalizable,
  indefinite_precision,
  singular_precision,
  clamped,
  unbounded_forgetting,
};

/// Machine-readable cause code, e.g. "INDEFINITE_PRECISION".
std::string to_string(PathologyKind k);
PathologyKind parse_pathology_kind(const std::string& s);

struct PathologyReport {
  PathologyKind kind = PathologyKind::valid;
  std::string detail;
  std::vector<std::size_t> offending_coords;
  std::optional<double> min_eigenvalue;

  [[nodiscard]] bool is_valid() const { return kind == PathologyKind::valid; }
};

/// Report for a precision classification; offending coordinates are the diagonal entries
/// at or below the definiteness tolerance (diagonal precisions only).
PathologyReport report_from_precision(const NaturalGaussian& n, const DefinitenessClass& cls);

namespace pathology {

/// exp(-weight (theta - center)^2) multiplied in (+1) or divided out (-1).
struct GaussianFactor {
  double weight = 1.0;
  double center = 0.0;
  int sign = 1;
};

/// Unnormalized scalar log-density: sum_k c_k theta^k (k <= 4) plus Gaussian factors.
struct ScalarDensity {
  std::array<double, 5> coeffs{};
  std::vector<GaussianFactor> factors;

  /// Polynomial coefficients with every factor expanded in.
  [[nodiscard]] std::array<double, 5> total_coeffs() const;
  [[nodiscard]] double log_density(double theta) const;
};

/// Classifies normalizability from the leading even coefficient. Throws
/// std::invalid_argument when the leading nonzero term has odd degree.
PathologyReport tail_classify_1d(const ScalarDensity& density);

struct NormalizerResult {
  std::optional<double> log_normalizer;  ///< absent when divergent or non-finite
  bool divergent = false;
  bool non_finite = false;
  double log_integral_base = 0.0;
  double log_integral_wide = 0.0;
};

/// Trapezoid log of the integral of exp(log_density) over [lo, hi]; flags DIVERGENT when
/// doubling the interval width about its center changes the integral by more than 1%.
NormalizerResult numeric_log_normalizer(const ScalarDensity& density, double lo, double hi,
                                        double step);

struct QuarticDemo {
  double mode = 0.0;
  DiagGaussian laplace_posterior;
  ScalarDensity after_removal;
  PathologyReport report;
  NormalizerResult quadrature;
};

/// Quartic prior exp(-theta^4 + 1.5 theta^2) with factors exp(-(theta+1)^2), exp(-(theta-1)^2):
/// Laplace-approximate the posterior, then divide one factor back out of it.
QuarticDemo quartic_demo();

/// Same construction but dividing out `removed` instead of exp(-(theta-1)^2).
QuarticDemo quartic_demo(const GaussianFactor& removed);

struct BlrDemo {
  FullGaussian prior;
  FullGaussian posterior;          ///< after the five observations
  Dataset observed;
  FullGaussian recovered_prior;    ///< case (a): all observations unlearned
  double max_recovery_error = 0.0;
  double near_x = 0.0;             ///< case (b): unobserved in-range point
  double near_y = 0.0;
  FullGaussian near_result;
  PathologyReport near_report;
  double near_kl_to_prior = 0.0;
  double near_kl_to_retrain = 0.0; ///< retrain baseline is the untouched posterior
  double far_x = 0.0;              ///< case (c): first far point whose deletion breaks PD
  double far_y = 0.0;
  PathologyReport far_report;
};

BlrDemo blr_unobserved_demo();

}  // namespace pathology
}  // namespace bayesun
