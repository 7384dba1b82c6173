#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/predictive.hpp"

namespace bayesun::blr {

/// Basis expansion for the conjugate linear model.
///
/// bias_linear: phi(x) = (x, 1), the same coordinate order as a hidden-free MLP (w, b).
/// polynomial(d): phi(x) = (x, x^2, ..., x^d), no bias column.
class FeatureMap {
 public:
  enum class Kind { bias_linear, polynomial };

  static FeatureMap bias_linear() { return FeatureMap(Kind::bias_linear, 1); }
  static FeatureMap polynomial(int degree);
  /// Parses "bias_linear" or "poly:<d>".
  static FeatureMap parse(const std::string& text);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] Eigen::Index output_dim() const;
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] Vector features(double x) const;
  /// N x output_dim design matrix.
  [[nodiscard]] Matrix design(const std::vector<double>& xs) const;

 private:
  FeatureMap(Kind k, int d) : kind_(k), degree_(d) {}
  Kind kind_;
  int degree_;
};

FullGaussian fit(const FullGaussian& prior, const Dataset& data, const FeatureMap& features);

struct UnlearnResult {
  NaturalGaussian natural;
  DefinitenessClass definiteness;
  std::optional<FullGaussian> posterior;  ///< present only when the downdated precision is PD
};

UnlearnResult unlearn(const FullGaussian& posterior, const Dataset& del_data,
                      const FeatureMap& features);

PredictiveTable predict(const FullGaussian& posterior, const std::vector<double>& x_grid,
                        const FeatureMap& features, double sigma);

double log_evidence(const FullGaussian& prior, const Dataset& data, const FeatureMap& features);

}  // namespace bayesun::blr
