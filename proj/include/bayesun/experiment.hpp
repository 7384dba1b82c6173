#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayesun/dataset.hpp"
#include "bayesun/gaussian.hpp"
#include "bayesun/laplace.hpp"
#include "bayesun/lbun.hpp"
#include "bayesun/mlp.hpp"
#include "bayesun/optim.hpp"
#include "bayesun/pathology.hpp"
#include "bayesun/vbun.hpp"
#include "bayesun/vi.hpp"

namespace bayesun::experiment {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed = true;  ///< false: open interval (lo, hi)

  [[nodiscard]] bool contains(double x) const { return closed ? (x >= lo && x <= hi) : (x > lo && x < hi); }
};

std::vector<double> linspace(double lo, double hi, int n);

/// Sine regression task with a central block of points scheduled for deletion.
struct Scenario {
  std::uint64_t seed = 1;
  int n_total = 300;
  int n_delete = 200;
  std::array<Interval, 2> retain_regions{Interval{-4.0, -2.0, true}, Interval{2.0, 4.0, true}};
  Interval delete_region{-2.0, 2.0, false};
  double sigma = 0.1;
  std::vector<double> grid = linspace(-5.0, 5.0, 200);

  int hidden_units = 50;
  double prior_precision = 1.0;
  OptimizerConfig laplace_optimizer;
  OptimizerConfig vi_optimizer = default_vi_optimizer();
  vi::ViOptions vi_options;
  int predictive_samples = 1000;
  /// kl_to_baseline above this many nats marks a row as dissimilar to the baseline.
  double dissimilarity_threshold = 10.0;

  static OptimizerConfig default_vi_optimizer() {
    OptimizerConfig c;
    c.step_size = 1e-3;
    c.iterations = 30000;
    c.polish_iterations = 0;
    return c;
  }
  [[nodiscard]] MlpArchitecture architecture() const { return {hidden_units}; }
  [[nodiscard]] DiagGaussian prior() const;
  [[nodiscard]] bool in_retain_region(double x) const;
  void validate() const;
};

/// Sub-seeds derived from Scenario::seed.
namespace streams {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t train = 2;
inline constexpr std::uint64_t predictive = 3;
inline constexpr std::uint64_t unlearn = 4;
}  // namespace streams

struct SplitData {
  Dataset all;  ///< ret followed by del
  Dataset ret;
  Dataset del;
};

/// y = sin(x) + N(0, sigma^2); (n_total - n_delete) / 2 inputs uniform in each retain region
/// and n_delete uniform in the delete region.
SplitData gen_sine_data(const Scenario& s);

PredictiveTable posterior_predictive(const MlpArchitecture& arch, const DiagGaussian& posterior,
                                     const std::vector<double>& grid, double sigma,
                                     const laplace::PredictMode& mode);

enum class PredictiveKind { mc, linearized };

std::string to_string(PredictiveKind k);
PredictiveKind parse_predictive_kind(const std::string& s);

/// How grid predictives are computed for a comparison.
///
/// linearized expands the network around each posterior's own mean.
struct ComparisonOptions {
  PredictiveKind predictive = PredictiveKind::mc;
  int samples = 1000;
  std::uint64_t seed = 0;
};

/// Differences between a candidate posterior `a` and a reference `b`.
///
/// kl_to_baseline is KL(a || b). mean_shift_on_grid and rmse_retained are symmetric in
/// (a, b). The std averages use epistemic std: the `avg_std_*` fields describe `a`, the
/// `reference_avg_std_*` fields describe `b`.
struct ComparisonMetrics {
  double kl_to_baseline = 0.0;
  double mean_shift_on_grid = 0.0;  ///< max |mean_a - mean_b| over the grid
  double avg_std_deleted_region = 0.0;
  double avg_std_retained_region = 0.0;
  double reference_avg_std_deleted_region = 0.0;
  double reference_avg_std_retained_region = 0.0;
  double rmse_retained = 0.0;  ///< RMS of mean_a - mean_b over retained-region grid points

  [[nodiscard]] bool all_finite() const;
};

/// Region averages of std_epistemic over grid points.
struct RegionStd {
  double deleted = 0.0;
  double retained = 0.0;
};
RegionStd region_std(const PredictiveTable& t, const Scenario& s);

ComparisonMetrics compare_predictives(const DiagGaussian& a, const PredictiveTable& pa,
                                      const DiagGaussian& b, const PredictiveTable& pb,
                                      const Scenario& s);

ComparisonMetrics compare_posteriors(const MlpArchitecture& arch, const DiagGaussian& a,
                                     const DiagGaussian& b, const Scenario& s,
                                     const ComparisonOptions& opts = {});

enum class Method { laplace, vi };
enum class UnlearnerKind { lbun, vbun, retrain };

std::string to_string(Method m);
std::string to_string(UnlearnerKind u);
Method parse_method(const std::string& s);
UnlearnerKind parse_unlearner(const std::string& s);

/// Predictive used for a method's comparisons: linearized for Laplace-family posteriors, MC
/// (S = scenario.predictive_samples, fixed seed) for variational ones.
ComparisonOptions comparison_options(Method m, const Scenario& s);

struct UnlearnerConfig {
  UnlearnerKind kind = UnlearnerKind::retrain;
  std::vector<double> lambdas;
  lbun::LbunConfig lbun;  ///< lambda overwritten per cell
  vbun::VbunConfig vbun;  ///< lambda overwritten per cell

  static std::vector<double> default_lambdas(UnlearnerKind k);
};

struct TrainedPosterior {
  Method method = Method::laplace;
  DiagGaussian posterior;
  std::vector<double> trace;
  double final_objective = 0.0;
};

TrainedPosterior train(Method m, const Dataset& data, const Scenario& s);

/// One unlearning result. Posterior-dependent fields are absent when no valid Gaussian
/// came out; `mean_shift_vs_original` is +inf for UNBOUNDED_FORGETTING.
struct CellResult {
  double lambda = 0.0;
  PathologyReport report;
  std::optional<DiagGaussian> posterior;
  std::optional<NaturalGaussian> natural;  ///< L-BUN precision before clamping
  std::optional<Vector> mode;              ///< L-BUN mode, also when no Gaussian exists
  std::optional<ComparisonMetrics> vs_baseline;
  std::optional<ComparisonMetrics> vs_original;
  std::optional<PredictiveTable> predictive;
  double mean_shift_vs_original = 0.0;
  double param_shift = 0.0;  ///< |mean - q_all.mean|_2, +inf when unbounded
  double kl_to_original = 0.0;
  bool dissimilar_to_baseline = false;
  std::vector<double> trace;
};

struct RunArtifacts {
  Scenario scenario;
  Method method = Method::laplace;
  UnlearnerKind unlearner = UnlearnerKind::retrain;
  SplitData data;
  TrainedPosterior original;
  TrainedPosterior baseline;
  PredictiveTable original_predictive;
  PredictiveTable baseline_predictive;
  std::vector<CellResult> cells;
};

/// Unlearns q_all = posterior trained on `data.all` with one configured unlearner and one
/// lambda. For retrain the cell is the baseline itself.
CellResult run_cell(const Scenario& s, Method m, const SplitData& data, const TrainedPosterior& original,
                    const TrainedPosterior& baseline, const PredictiveTable& baseline_predictive,
                    const PredictiveTable& original_predictive, UnlearnerKind kind, double lambda,
                    const UnlearnerConfig& cfg);

/// Train on D_all, unlearn D_del per lambda, retrain on D_ret, compare.
RunArtifacts run_scenario(Method m, const UnlearnerConfig& unlearner, const Scenario& s);

}  // namespace bayesun::experiment
