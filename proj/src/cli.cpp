#include "bayesun/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "bayesun/blr.hpp"
#include "bayesun/checkpoint.hpp"
#include "bayesun/config.hpp"
#include "bayesun/experiment.hpp"
#include "bayesun/laplace.hpp"
#include "bayesun/lbun.hpp"
#include "bayesun/output.hpp"
#include "bayesun/pathology.hpp"
#include "bayesun/rng.hpp"
#include "bayesun/vbun.hpp"

namespace bayesun::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Operational failure with a message for stderr; maps to exit 1.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string config;
};

struct Context {
  Globals globals;
  io::RunConfig config;
  std::string command_line;
  std::ostream* out = nullptr;

  [[nodiscard]] std::uint64_t seed() const { return config.scenario.seed; }
  [[nodiscard]] fs::path path(const std::string& name) const { return fs::path(globals.out_dir) / name; }
  void announce(const fs::path& p) const { *out << "wrote " << p.string() << "\n"; }
};

ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json report_json(const PathologyReport& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["detail"] = r.detail;
  j["offending_coords"] = r.offending_coords;
  j["min_eigenvalue"] = r.min_eigenvalue ? num(*r.min_eigenvalue) : ordered_json(nullptr);
  return j;
}

ordered_json metrics_json(const experiment::ComparisonMetrics& m) {
  ordered_json j;
  j["kl_to_baseline"] = num(m.kl_to_baseline);
  j["mean_shift_on_grid"] = num(m.mean_shift_on_grid);
  j["avg_std_deleted_region"] = num(m.avg_std_deleted_region);
  j["avg_std_retained_region"] = num(m.avg_std_retained_region);
  j["reference_avg_std_deleted_region"] = num(m.reference_avg_std_deleted_region);
  j["reference_avg_std_retained_region"] = num(m.reference_avg_std_retained_region);
  j["rmse_retained"] = num(m.rmse_retained);
  return j;
}

void write_text(const Context& ctx, const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  io::write_file(p.string(), text);
  ctx.announce(p);
}

void write_json(const Context& ctx, const fs::path& p, const ordered_json& j) {
  write_text(ctx, p, j.dump(2) + "\n");
}

void write_checkpoint(const Context& ctx, const fs::path& p, io::PosteriorCheckpoint c) {
  c.provenance.id = io::checkpoint_id(c);
  write_text(ctx, p, io::to_text(c));
}

MlpArchitecture mlp_of(const io::PosteriorCheckpoint& c) {
  if (c.architecture.kind != "mlp") throw CommandError("checkpoint does not describe an MLP posterior");
  return {c.architecture.hidden_units};
}

io::PosteriorCheckpoint mlp_checkpoint(const std::string& method, const MlpArchitecture& arch,
                                       const DiagGaussian& g, const DiagGaussian& prior, double sigma,
                                       std::uint64_t seed, const std::string& command) {
  io::PosteriorCheckpoint c;
  c.method = method;
  c.architecture.kind = "mlp";
  c.architecture.hidden_units = arch.hidden_units;
  c.gaussian = g;
  c.prior = prior;
  c.sigma = sigma;
  c.seed = seed;
  c.provenance.command = command;
  return c;
}

/// Refuses pathological checkpoints as inputs unless forced.
void require_usable(const io::PosteriorCheckpoint& c, const std::string& path, bool force) {
  if (c.usable_for_prediction()) return;
  if (!c.gaussian) {
    throw CommandError(path + ": checkpoint has no valid Gaussian (" + to_string(c.pathology->kind) + ")");
  }
  if (!force) {
    throw CommandError(path + ": checkpoint carries pathology " + to_string(c.pathology->kind) +
                       "; pass --force to use it anyway");
  }
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(Context& ctx) {
  const auto& s = ctx.config.scenario;
  const auto data = experiment::gen_sine_data(s);
  write_text(ctx, ctx.path("data_all.csv"), io::dataset_csv(data.all));
  write_text(ctx, ctx.path("data_ret.csv"), io::dataset_csv(data.ret));
  write_text(ctx, ctx.path("data_del.csv"), io::dataset_csv(data.del));
  return kExitOk;
}

// ---------------------------------------------------------------- train / retrain

struct TrainArgs {
  std::string method = "laplace";
  std::string data;
  std::string output;
  std::string features = "bias_linear";
};

int cmd_train(Context& ctx, const TrainArgs& a, bool retrain) {
  const auto data = io::load_dataset(a.data);
  data.require_positive_sigma();
  const auto& s = ctx.config.scenario;
  const std::string verb = retrain ? "retrain" : "train";
  const fs::path out = a.output.empty()
                           ? ctx.path(a.method + (retrain ? "_retrain.yaml" : ".yaml"))
                           : fs::path(a.output);
  io::PosteriorCheckpoint c;
  if (a.method == "blr") {
    const auto features = blr::FeatureMap::parse(a.features);
    const auto d = features.output_dim();
    FullGaussian prior(Vector::Zero(d), Matrix::Identity(d, d) / s.prior_precision);
    c.method = "blr";
    c.architecture.kind = "blr";
    c.architecture.features = features.to_string();
    c.gaussian = blr::fit(prior, data, features);
    c.prior = prior;
    c.sigma = data.sigma;
    c.seed = ctx.seed();
    c.provenance.command = verb;
  } else {
    const auto m = experiment::parse_method(a.method);
    const auto arch = s.architecture();
    auto trained = experiment::train(m, data, s);
    c = mlp_checkpoint(a.method, arch, trained.posterior, s.prior(), data.sigma, ctx.seed(), verb);
    if (m == experiment::Method::laplace) c.theta_map = trained.posterior.mean();
  }
  c.provenance.data_digest = io::dataset_digest(data);
  write_checkpoint(ctx, out, c);
  return kExitOk;
}

// ---------------------------------------------------------------- unlearn

struct UnlearnArgs {
  std::string method = "lbun";
  std::string checkpoint;
  std::string del;
  std::string output;
  std::optional<double> lambda;
  bool clamp = false;
  std::optional<double> clamp_epsilon;
  std::string gate;
  bool force = false;
};

int cmd_unlearn(Context& ctx, const UnlearnArgs& a) {
  const auto src = io::load_checkpoint(a.checkpoint);
  require_usable(src, a.checkpoint, a.force);
  const auto del = io::load_dataset(a.del);
  if (!del.empty()) del.require_positive_sigma();
  if (!del.empty() && del.sigma != src.sigma) {
    throw CommandError("deleted data sigma " + io::format_double(del.sigma) + " differs from checkpoint sigma " +
                       io::format_double(src.sigma));
  }
  const fs::path out = a.output.empty() ? ctx.path(a.method + "_unlearned.yaml") : fs::path(a.output);

  io::PosteriorCheckpoint c;
  PathologyReport report;
  if (a.method == "blr") {
    if (src.architecture.kind != "blr") throw CommandError("--method blr needs a blr checkpoint");
    const auto features = blr::FeatureMap::parse(src.architecture.features);
    auto r = blr::unlearn(src.full(), del, features);
    report = report_from_precision(r.natural, r.definiteness);
    c = src;
    c.gaussian.reset();
    if (r.posterior) c.gaussian = *r.posterior;
    c.natural = r.natural;
  } else if (a.method == "lbun") {
    const auto arch = mlp_of(src);
    auto cfg = ctx.config.lbun;
    cfg.lambda = a.lambda.value_or(cfg.lambda);
    if (a.clamp) cfg.clamp.enabled = true;
    if (a.clamp_epsilon) cfg.clamp.epsilon = *a.clamp_epsilon;
    auto r = lbun::unlearn(arch, src.diag(), del, cfg);
    report = r.posterior.report;
    c = mlp_checkpoint("lbun", arch, src.diag(), std::get<DiagGaussian>(src.prior), src.sigma, ctx.seed(),
                       "unlearn");
    c.gaussian.reset();
    if (r.posterior.posterior) c.gaussian = *r.posterior.posterior;
    if (report.kind != PathologyKind::unbounded_forgetting) {
      c.natural = r.posterior.natural;
      c.theta_map = r.mode.theta;
    }
    c.provenance.lambda = cfg.lambda;
  } else if (a.method == "vbun") {
    const auto arch = mlp_of(src);
    auto cfg = ctx.config.vbun;
    if (a.lambda) cfg.lambda = *a.lambda;
    if (!a.gate.empty()) cfg.gate = vbun::parse_gate_direction(a.gate);
    cfg.optimizer.seed = derive_seed(ctx.seed(), experiment::streams::unlearn);
    auto r = vbun::train_vbun(arch, src.diag(), del, cfg);
    c = mlp_checkpoint("vbun", arch, r.posterior, std::get<DiagGaussian>(src.prior), src.sigma, ctx.seed(),
                       "unlearn");
    c.provenance.lambda = cfg.lambda;
  } else {
    throw CommandError("unknown unlearning method '" + a.method + "' (expected lbun, vbun or blr)");
  }
  c.seed = ctx.seed();
  c.provenance.command = "unlearn";
  c.provenance.parent = src.provenance.id;
  c.provenance.data_digest = src.provenance.data_digest;
  c.provenance.deleted_digest = io::dataset_digest(del);
  if (!report.is_valid()) c.pathology = report;
  write_checkpoint(ctx, out, c);

  fs::path report_path = out;
  report_path.replace_extension(".report.json");
  ordered_json j;
  j["method"] = a.method;
  j["lambda"] = c.provenance.lambda ? num(*c.provenance.lambda) : ordered_json(nullptr);
  j["report"] = report_json(report);
  write_json(ctx, report_path, j);
  if (!report.is_valid()) {
    *ctx.out << "pathology " << to_string(report.kind) << ": " << report.detail << "\n";
    *ctx.out << "report " << report_path.string() << "\n";
    return kExitPathology;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string checkpoint;
  std::string output;
  std::string mode;
  std::optional<int> samples;
  std::string plot;
  std::string data;
  bool force = false;
};

std::string default_mode(const std::string& method) {
  return (method == "laplace" || method == "lbun") ? "linearized" : "mc";
}

PredictiveTable predictive_of(const Context& ctx, const io::PosteriorCheckpoint& c, std::string mode,
                              std::optional<int> samples) {
  const auto& grid = ctx.config.scenario.grid;
  if (c.architecture.kind == "blr") {
    return blr::predict(c.full(), grid, blr::FeatureMap::parse(c.architecture.features), c.sigma);
  }
  const auto arch = mlp_of(c);
  if (mode.empty()) mode = default_mode(c.method);
  laplace::PredictMode pm;
  if (mode == "linearized") {
    pm = laplace::LinearizedMode{c.theta_map.value_or(c.diag().mean())};
  } else if (mode == "mc") {
    pm = laplace::McMode{samples.value_or(ctx.config.scenario.predictive_samples),
                         derive_seed(ctx.seed(), experiment::streams::predictive)};
  } else {
    throw CommandError("unknown predictive mode '" + mode + "' (expected mc or linearized)");
  }
  return laplace::predict(arch, c.diag(), grid, c.sigma, pm);
}

int cmd_predict(Context& ctx, const PredictArgs& a) {
  const auto c = io::load_checkpoint(a.checkpoint);
  require_usable(c, a.checkpoint, a.force);
  const auto table = predictive_of(ctx, c, a.mode, a.samples);
  const fs::path out = a.output.empty() ? ctx.path("predictive.csv") : fs::path(a.output);
  write_text(ctx, out, io::predictive_csv(table));
  if (!a.plot.empty()) {
    std::optional<Dataset> data;
    if (!a.data.empty()) data = io::load_dataset(a.data);
    write_text(ctx, a.plot, io::predictive_svg(table, data ? &*data : nullptr, c.method + " predictive"));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string a;
  std::string b;
  std::string output;
  std::string mode;
  bool force = false;
};

int cmd_compare(Context& ctx, const CompareArgs& args) {
  const auto a = io::load_checkpoint(args.a);
  const auto b = io::load_checkpoint(args.b);
  require_usable(a, args.a, args.force);
  require_usable(b, args.b, args.force);
  if (a.architecture.kind != b.architecture.kind || a.architecture.hidden_units != b.architecture.hidden_units ||
      a.architecture.features != b.architecture.features) {
    throw CommandError("checkpoints describe different architectures");
  }
  const auto& s = ctx.config.scenario;
  experiment::ComparisonMetrics m;
  if (a.architecture.kind == "blr") {
    const auto pa = predictive_of(ctx, a, "", std::nullopt);
    const auto pb = predictive_of(ctx, b, "", std::nullopt);
    // Reuse the diagonal comparison for the predictive fields, then replace the KL.
    const DiagGaussian da(a.full().mean(), a.full().cov().diagonal());
    const DiagGaussian db(b.full().mean(), b.full().cov().diagonal());
    m = experiment::compare_predictives(da, pa, db, pb, s);
    m.kl_to_baseline = kl_divergence(a.full(), b.full());
  } else {
    const std::string mode = args.mode.empty() ? default_mode(a.method) : args.mode;
    const auto pa = predictive_of(ctx, a, mode, std::nullopt);
    const auto pb = predictive_of(ctx, b, mode, std::nullopt);
    m = experiment::compare_predictives(a.diag(), pa, b.diag(), pb, s);
  }
  ordered_json j;
  j["a"] = a.provenance.id;
  j["b"] = b.provenance.id;
  j["metrics"] = metrics_json(m);
  const fs::path out = args.output.empty() ? ctx.path("compare.json") : fs::path(args.output);
  write_json(ctx, out, j);
  *ctx.out << j["metrics"].dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string method = "laplace";
  std::string unlearner = "lbun";
  std::vector<double> lambdas;
  bool plots = true;
};

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cell_name(std::size_t i, double lambda) {
  return "cell_" + std::to_string(i) + "_lambda_" + short_double(lambda);
}

int cmd_sweep(Context& ctx, const SweepArgs& a) {
  const auto& s = ctx.config.scenario;
  const auto method = experiment::parse_method(a.method);
  experiment::UnlearnerConfig u;
  u.kind = experiment::parse_unlearner(a.unlearner);
  u.lbun = ctx.config.lbun;
  u.vbun = ctx.config.vbun;
  u.lambdas = a.lambdas;
  if (u.lambdas.empty()) {
    if (u.kind == experiment::UnlearnerKind::lbun) u.lambdas = ctx.config.lbun_lambdas;
    if (u.kind == experiment::UnlearnerKind::vbun) u.lambdas = ctx.config.vbun_lambdas;
  }
  const auto run = experiment::run_scenario(method, u, s);
  const auto arch = s.architecture();
  const fs::path dir = ctx.path("sweep_" + a.method + "_" + a.unlearner);

  write_text(ctx, dir / "data_all.csv", io::dataset_csv(run.data.all));
  write_text(ctx, dir / "data_ret.csv", io::dataset_csv(run.data.ret));
  write_text(ctx, dir / "data_del.csv", io::dataset_csv(run.data.del));

  auto base_ck = [&](const experiment::TrainedPosterior& t, const Dataset& d, const std::string& cmd) {
    auto c = mlp_checkpoint(a.method, arch, t.posterior, s.prior(), s.sigma, s.seed, cmd);
    if (method == experiment::Method::laplace) c.theta_map = t.posterior.mean();
    c.provenance.data_digest = io::dataset_digest(d);
    c.provenance.id = io::checkpoint_id(c);
    return c;
  };
  const auto original = base_ck(run.original, run.data.all, "sweep:train");
  const auto baseline = base_ck(run.baseline, run.data.ret, "sweep:retrain");
  write_text(ctx, dir / "original.yaml", io::to_text(original));
  write_text(ctx, dir / "baseline.yaml", io::to_text(baseline));
  write_text(ctx, dir / "original_predictive.csv", io::predictive_csv(run.original_predictive));
  write_text(ctx, dir / "baseline_predictive.csv", io::predictive_csv(run.baseline_predictive));
  if (a.plots) {
    write_text(ctx, dir / "original_predictive.svg",
               io::predictive_svg(run.original_predictive, &run.data.all, a.method + " on all data"));
    write_text(ctx, dir / "baseline_predictive.svg",
               io::predictive_svg(run.baseline_predictive, &run.data.ret, a.method + " retrained"));
  }

  const auto ro = experiment::region_std(run.original_predictive, s);
  const auto rb = experiment::region_std(run.baseline_predictive, s);
  ordered_json summary;
  summary["method"] = a.method;
  summary["unlearner"] = a.unlearner;
  summary["seed"] = s.seed;
  summary["original"] = {{"id", original.provenance.id},
                         {"final_objective", num(run.original.final_objective)},
                         {"avg_std_deleted_region", num(ro.deleted)},
                         {"avg_std_retained_region", num(ro.retained)}};
  summary["baseline"] = {{"id", baseline.provenance.id},
                         {"final_objective", num(run.baseline.final_objective)},
                         {"avg_std_deleted_region", num(rb.deleted)},
                         {"avg_std_retained_region", num(rb.retained)}};
  ordered_json rows = ordered_json::array();
  bool any_pathology = false;
  for (std::size_t i = 0; i < run.cells.size(); ++i) {
    const auto& cell = run.cells[i];
    const auto name = cell_name(i, cell.lambda);
    io::PosteriorCheckpoint c;
    c.method = a.unlearner == "retrain" ? a.method : a.unlearner;
    c.architecture.hidden_units = arch.hidden_units;
    c.prior = s.prior();
    c.sigma = s.sigma;
    c.seed = s.seed;
    if (cell.posterior) c.gaussian = *cell.posterior;
    c.natural = cell.natural;
    c.theta_map = cell.mode;
    c.provenance.parent = a.unlearner == "retrain" ? "" : original.provenance.id;
    c.provenance.data_digest = io::dataset_digest(a.unlearner == "retrain" ? run.data.ret : run.data.all);
    c.provenance.deleted_digest = a.unlearner == "retrain" ? "" : io::dataset_digest(run.data.del);
    if (a.unlearner != "retrain") c.provenance.lambda = cell.lambda;
    c.provenance.command = "sweep:" + a.unlearner;
    if (!cell.report.is_valid()) {
      c.pathology = cell.report;
      any_pathology = true;
    }
    write_checkpoint(ctx, dir / (name + ".yaml"), c);
    if (cell.predictive) {
      write_text(ctx, dir / (name + "_predictive.csv"), io::predictive_csv(*cell.predictive));
      if (a.plots) {
        write_text(ctx, dir / (name + "_predictive.svg"),
                   io::predictive_svg(*cell.predictive, &run.data.ret,
                                      a.unlearner + " lambda " + short_double(cell.lambda)));
      }
    }
    ordered_json row;
    row["lambda"] = num(cell.lambda);
    row["checkpoint"] = name + ".yaml";
    row["report"] = report_json(cell.report);
    row["mean_shift_vs_original"] = num(cell.mean_shift_vs_original);
    row["param_shift"] = num(cell.param_shift);
    row["kl_to_original"] = num(cell.kl_to_original);
    row["vs_baseline"] = cell.vs_baseline ? metrics_json(*cell.vs_baseline) : ordered_json(nullptr);
    row["vs_original"] = cell.vs_original ? metrics_json(*cell.vs_original) : ordered_json(nullptr);
    row["dissimilar_to_baseline"] = cell.dissimilar_to_baseline;
    rows.push_back(row);
    *ctx.out << a.unlearner << " lambda=" << short_double(cell.lambda) << " " << to_string(cell.report.kind)
             << " mean_shift=" << short_double(cell.mean_shift_vs_original)
             << (cell.dissimilar_to_baseline ? " (no similarity to baseline)" : "") << "\n";
  }
  summary["rows"] = rows;
  write_json(ctx, dir / "summary.json", summary);
  return any_pathology ? kExitPathology : kExitOk;
}

// ---------------------------------------------------------------- pathology-demo

int cmd_pathology_demo(Context& ctx, const std::string& which) {
  std::ostringstream text;
  text.precision(17);
  ordered_json j;
  PathologyKind verdict = PathologyKind::valid;
  if (which == "quartic") {
    const auto d = pathology::quartic_demo();
    const auto c = d.after_removal.total_coeffs();
    text << "quartic prior exp(-theta^4 + 1.5 theta^2), factors exp(-(theta+1)^2), exp(-(theta-1)^2)\n";
    text << "mode: " << d.mode << "\n";
    text << "laplace posterior: mean " << d.laplace_posterior.mean()[0] << " variance "
         << d.laplace_posterior.var()[0] << "\n";
    text << "after removing exp(-(theta-1)^2): quadratic coefficient " << c[2] << "\n";
    text << "verdict: " << to_string(d.report.kind) << "\n";
    text << "detail: " << d.report.detail << "\n";
    text << "quadrature probe: " << (d.quadrature.divergent ? "DIVERGENT" : "CONVERGENT") << "\n";
    j["mode"] = num(d.mode);
    j["laplace_mean"] = num(d.laplace_posterior.mean()[0]);
    j["laplace_variance"] = num(d.laplace_posterior.var()[0]);
    j["after_removal_coefficients"] = {num(c[0]), num(c[1]), num(c[2]), num(c[3]), num(c[4])};
    j["report"] = report_json(d.report);
    j["quadrature_divergent"] = d.quadrature.divergent;
    verdict = d.report.kind;
  } else if (which == "blr") {
    const auto d = pathology::blr_unobserved_demo();
    text << "five observations, prior N(0, I), sigma 0.5\n";
    text << "(a) unlearn all observations: max error vs prior " << d.max_recovery_error << "\n";
    text << "(b) unlearn unobserved (" << d.near_x << ", " << d.near_y << "): " << to_string(d.near_report.kind)
         << ", KL to prior " << d.near_kl_to_prior << ", KL to retrain baseline " << d.near_kl_to_retrain << "\n";
    text << "(c) unlearn unobserved (" << d.far_x << ", " << d.far_y << "): " << to_string(d.far_report.kind)
         << "\n";
    text << "detail: " << d.far_report.detail << "\n";
    j["recovery_error"] = num(d.max_recovery_error);
    j["near"] = {{"x", num(d.near_x)},
                 {"y", num(d.near_y)},
                 {"report", report_json(d.near_report)},
                 {"kl_to_prior", num(d.near_kl_to_prior)},
                 {"kl_to_retrain", num(d.near_kl_to_retrain)}};
    j["far"] = {{"x", num(d.far_x)}, {"y", num(d.far_y)}, {"report", report_json(d.far_report)}};
    verdict = d.far_report.kind;
  } else {
    throw CommandError("unknown demo '" + which + "' (expected quartic or blr)");
  }
  write_text(ctx, ctx.path("pathology_" + which + ".txt"), text.str());
  write_json(ctx, ctx.path("pathology_" + which + ".json"), j);
  *ctx.out << text.str();
  return verdict == PathologyKind::valid ? kExitOk : kExitPathology;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) throw CommandError("bad lambda list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian unlearning of a small regression network"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();
  app.add_option("--config", g.config, "YAML file overriding defaults");

  auto* gen = app.add_subcommand("gen-data", "Write the sine data split as CSV");
  std::optional<int> n_total;
  std::optional<int> n_delete;
  std::optional<double> sigma;
  gen->add_option("--n-total", n_total);
  gen->add_option("--n-delete", n_delete);
  gen->add_option("--sigma", sigma);

  TrainArgs train_args;
  TrainArgs retrain_args;
  auto add_train = [&](const char* name, const char* desc, TrainArgs& t) {
    auto* sc = app.add_subcommand(name, desc);
    sc->add_option("--method", t.method, "blr, laplace or vi")->capture_default_str();
    sc->add_option("--data", t.data, "Training data CSV")->required();
    sc->add_option("--output", t.output, "Checkpoint path");
    sc->add_option("--features", t.features, "blr features: bias_linear or poly:<d>")->capture_default_str();
    return sc;
  };
  auto* train = add_train("train", "Fit a posterior", train_args);
  auto* retrain = add_train("retrain", "Fit the retained-data baseline", retrain_args);

  UnlearnArgs un;
  auto* unlearn = app.add_subcommand("unlearn", "Remove data from a posterior");
  unlearn->add_option("--method", un.method, "lbun, vbun or blr")->capture_default_str();
  unlearn->add_option("--checkpoint", un.checkpoint)->required();
  unlearn->add_option("--delete", un.del, "Data to forget (CSV)")->required();
  unlearn->add_option("--lambda", un.lambda);
  unlearn->add_option("--output", un.output);
  unlearn->add_flag("--clamp", un.clamp, "Floor non-positive L-BUN precisions");
  unlearn->add_option("--clamp-epsilon", un.clamp_epsilon);
  unlearn->add_option("--gate", un.gate, "suppress_low_density or suppress_high_density");
  unlearn->add_flag("--force", un.force, "Accept a pathological input checkpoint");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Posterior predictive on the grid");
  predict->add_option("--checkpoint", pr.checkpoint)->required();
  predict->add_option("--output", pr.output, "CSV path");
  predict->add_option("--mode", pr.mode, "mc or linearized");
  predict->add_option("--samples", pr.samples);
  predict->add_option("--plot", pr.plot, "SVG path");
  predict->add_option("--data", pr.data, "Data CSV drawn on the plot");
  predict->add_flag("--force", pr.force, "Accept a pathological checkpoint");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Compare posterior a against reference b");
  compare->add_option("--a", cmp.a)->required();
  compare->add_option("--b", cmp.b)->required();
  compare->add_option("--output", cmp.output);
  compare->add_option("--mode", cmp.mode, "mc or linearized");
  compare->add_flag("--force", cmp.force);

  SweepArgs sw;
  std::string lambda_list;
  bool no_plots = false;
  auto* sweep = app.add_subcommand("sweep", "Train, unlearn over a lambda grid, retrain and compare");
  sweep->add_option("--method", sw.method, "laplace or vi")->capture_default_str();
  sweep->add_option("--unlearner", sw.unlearner, "lbun, vbun or retrain")->capture_default_str();
  sweep->add_option("--lambdas", lambda_list, "Comma-separated lambda values");
  sweep->add_flag("--no-plots", no_plots);

  std::string demo = "quartic";
  auto* pdemo = app.add_subcommand("pathology-demo", "Reproduce a failure case");
  pdemo->add_option("demo", demo, "quartic or blr")->capture_default_str();

  for (auto* sc : {gen, train, retrain, unlearn, predict, compare, sweep, pdemo}) sc->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitError;
  }

  Context ctx;
  ctx.globals = g;
  ctx.out = &out;
  std::string joined;
  for (const auto& a : args) joined += (joined.empty() ? "" : " ") + a;
  ctx.command_line = joined;
  try {
    if (!g.config.empty()) ctx.config = io::load_config(g.config);
    if (g.seed) ctx.config.scenario.seed = *g.seed;
    if (n_total) ctx.config.scenario.n_total = *n_total;
    if (n_delete) ctx.config.scenario.n_delete = *n_delete;
    if (sigma) ctx.config.scenario.sigma = *sigma;
    fs::create_directories(g.out_dir);

    if (gen->parsed()) return cmd_gen_data(ctx);
    if (train->parsed()) return cmd_train(ctx, train_args, false);
    if (retrain->parsed()) return cmd_train(ctx, retrain_args, true);
    if (unlearn->parsed()) return cmd_unlearn(ctx, un);
    if (predict->parsed()) return cmd_predict(ctx, pr);
    if (compare->parsed()) return cmd_compare(ctx, cmp);
    if (sweep->parsed()) {
      if (!lambda_list.empty()) sw.lambdas = parse_list(lambda_list);
      sw.plots = !no_plots;
      return cmd_sweep(ctx, sw);
    }
    if (pdemo->parsed()) return cmd_pathology_demo(ctx, demo);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << app.help();
  return kExitError;
}

}  // namespace bayesun::cli
