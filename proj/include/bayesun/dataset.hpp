#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bayesun {

/// Paired scalar inputs/targets with a known observation-noise standard deviation.
///
/// The noise scale is allowed to be zero at construction so noiseless data can be
/// generated; every likelihood evaluation calls require_positive_sigma().
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  double sigma = 1.0;

  Dataset() = default;
  Dataset(std::vector<double> xs, std::vector<double> ys, double noise_sigma)
      : x(std::move(xs)), y(std::move(ys)), sigma(noise_sigma) {
    if (x.size() != y.size()) {
      throw std::invalid_argument("Dataset: x and y lengths differ (" + std::to_string(x.size()) +
                                  " vs " + std::to_string(y.size()) + ")");
    }
    if (!(sigma >= 0.0)) throw std::invalid_argument("Dataset: sigma must be non-negative");
  }

  [[nodiscard]] std::size_t size() const { return x.size(); }
  [[nodiscard]] bool empty() const { return x.empty(); }

  void require_positive_sigma() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("Dataset: likelihood requires sigma > 0");
  }

  /// Points with the given indices, same sigma.
  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.sigma = sigma;
    out.x.reserve(indices.size());
    out.y.reserve(indices.size());
    for (auto i : indices) {
      out.x.push_back(x.at(i));
      out.y.push_back(y.at(i));
    }
    return out;
  }

  [[nodiscard]] Dataset with_sigma(double s) const { return Dataset(x, y, s); }
};

inline Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.sigma != b.sigma) throw std::invalid_argument("concat: datasets have different sigma");
  Dataset out = a;
  out.x.insert(out.x.end(), b.x.begin(), b.x.end());
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  return out;
}

}  // namespace bayesun
