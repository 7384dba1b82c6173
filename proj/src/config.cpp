#include "bayesun/config.hpp"

#include <yaml-cpp/yaml.h>

#include <set>

#include "bayesun/checkpoint.hpp"

namespace bayesun::io {

namespace {

class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& origin)
      : node_(node), path_(std::move(path)), origin_(origin) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) {
      throw ParseError(origin_, path_, "expected a mapping");
    }
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) throw ParseError(origin_, join(key), "unknown key");
    }
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.IsMap()) return;
    const auto n = node_[key];
    if (!n.IsDefined()) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ParseError(origin_, join(key) + " (line " + std::to_string(n.Mark().line + 1) + ")",
                       "bad value");
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(node_.IsMap() ? node_[key] : YAML::Node(), join(key), origin_);
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined(); }

 private:
  [[nodiscard]] std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::string origin_;
  std::set<std::string> seen_;
};

void read_optimizer(Section s, OptimizerConfig& c) {
  s.get("step_size", c.step_size);
  s.get("iterations", c.iterations);
  s.get("momentum", c.momentum);
  s.get("init_scale", c.init_scale);
  s.get("final_step_fraction", c.final_step_fraction);
  s.get("polish_iterations", c.polish_iterations);
  std::string kind = to_string(c.kind);
  s.get("kind", kind);
  c.kind = parse_optimizer_kind(kind);
}

}  // namespace

RunConfig apply_config(RunConfig cfg, const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(origin, "line " + std::to_string(e.mark.line + 1), e.msg);
  }
  {
    Section top(root, "", origin);
    auto& sc = cfg.scenario;
    top.get("seed", sc.seed);
    {
      auto s = top.sub("scenario");
      s.get("n_total", sc.n_total);
      s.get("n_delete", sc.n_delete);
      s.get("sigma", sc.sigma);
      s.get("hidden_units", sc.hidden_units);
      s.get("prior_precision", sc.prior_precision);
      s.get("predictive_samples", sc.predictive_samples);
      s.get("dissimilarity_threshold", sc.dissimilarity_threshold);
      if (s.has("grid")) {
        double lo = sc.grid.front();
        double hi = sc.grid.back();
        int n = static_cast<int>(sc.grid.size());
        auto g = s.sub("grid");
        g.get("lo", lo);
        g.get("hi", hi);
        g.get("n", n);
        sc.grid = experiment::linspace(lo, hi, n);
      } else {
        s.sub("grid");
      }
    }
    {
      auto s = top.sub("laplace");
      read_optimizer(s.sub("optimizer"), sc.laplace_optimizer);
    }
    {
      auto s = top.sub("vi");
      read_optimizer(s.sub("optimizer"), sc.vi_optimizer);
      s.get("train_samples", sc.vi_options.train_samples);
      s.get("report_samples", sc.vi_options.report_samples);
      s.get("warm_start_iterations", sc.vi_options.warm_start_iterations);
      s.get("init_log_std", sc.vi_options.init_log_std);
    }
    {
      auto s = top.sub("lbun");
      read_optimizer(s.sub("optimizer"), cfg.lbun.optimizer);
      s.get("objective_bound", cfg.lbun.objective_bound);
      s.get("lambdas", cfg.lbun_lambdas);
      auto c = s.sub("clamp");
      c.get("enabled", cfg.lbun.clamp.enabled);
      c.get("epsilon", cfg.lbun.clamp.epsilon);
    }
    {
      auto s = top.sub("vbun");
      read_optimizer(s.sub("optimizer"), cfg.vbun.optimizer);
      s.get("samples", cfg.vbun.samples);
      s.get("report_samples", cfg.vbun.report_samples);
      s.get("lambdas", cfg.vbun_lambdas);
      std::string gate = vbun::to_string(cfg.vbun.gate);
      s.get("gate", gate);
      cfg.vbun.gate = vbun::parse_gate_direction(gate);
    }
  }
  try {
    cfg.scenario.validate();
    cfg.scenario.laplace_optimizer.validate();
    cfg.scenario.vi_optimizer.validate();
    cfg.lbun.validate();
    cfg.vbun.validate();
    for (double l : cfg.lbun_lambdas) {
      if (!(l > 0.0)) throw std::invalid_argument("lbun lambdas must be > 0");
    }
    for (double l : cfg.vbun_lambdas) {
      if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("vbun lambdas must lie in (0, 1)");
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  return apply_config(std::move(base), read_file(path), path);
}

}  // namespace bayesun::io
