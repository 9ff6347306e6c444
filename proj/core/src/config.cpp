#include "confdiff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "confdiff/error.hpp"
#include "json.hpp"

namespace confdiff {
namespace {

using nlohmann::json;

// A JSON object together with the keys the schema has consumed; finish()
// rejects whatever is left.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  template <typename T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required field " + where(key));
    return convert<T>(key);
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    return has(key) ? convert<T>(key) : fallback;
  }

  Section child(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required section " + where(key));
    return Section(node_.at(key), where(key));
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown field " + where(item.key()));
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) const {
    const json& v = node_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
      } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
        for (const auto& e : v) {
          if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
        }
      } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of integers");
        for (const auto& e : v) {
          if (!e.is_number_unsigned()) throw ConfigError(where(key) + " must be an array of integers");
        }
      } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
        if (!v.is_array()) throw ConfigError(where(key) + " must be an array of strings");
        for (const auto& e : v) {
          if (!e.is_string()) throw ConfigError(where(key) + " must be an array of strings");
        }
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto rethrow_as_config(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

GaussianMixtureSpec parse_distribution(Section s) {
  GaussianMixtureSpec spec;
  spec.mean_pos = s.required<std::vector<double>>("mean_pos");
  spec.mean_neg = s.required<std::vector<double>>("mean_neg");
  spec.cov_diag_pos = s.required<std::vector<double>>("cov_diag_pos");
  spec.cov_diag_neg = s.required<std::vector<double>>("cov_diag_neg");
  spec.prior_pos = s.required<double>("prior_pos");
  spec.dim = s.optional<std::size_t>("dim", spec.mean_pos.size());
  s.finish();
  rethrow_as_config(s.where(), [&] { spec.validate(); return 0; });
  return spec;
}

ModelSpec parse_model(Section s, ModelSpec model) {
  if (s.has("kind")) {
    const auto name = s.required<std::string>("kind");
    model.kind = rethrow_as_config(s.where("kind"), [&] { return parse_model_kind(name); });
  }
  model.hidden_widths = s.optional("hidden_widths", model.hidden_widths);
  model.init_seed = s.optional<std::uint64_t>("init_seed", model.init_seed);
  s.finish();
  return model;
}

OptimizerConfig parse_optimizer(Section s) {
  OptimizerConfig opt;
  if (s.has("kind")) {
    const auto name = s.required<std::string>("kind");
    opt.kind = rethrow_as_config(s.where("kind"), [&] { return parse_optimizer_kind(name); });
  }
  opt.learning_rate = s.optional("learning_rate", opt.learning_rate);
  opt.weight_decay = s.optional("weight_decay", opt.weight_decay);
  opt.beta1 = s.optional("beta1", opt.beta1);
  opt.beta2 = s.optional("beta2", opt.beta2);
  opt.epsilon_hat = s.optional("epsilon_hat", opt.epsilon_hat);
  s.finish();
  rethrow_as_config(s.where(), [&] { opt.validate(); return 0; });
  return opt;
}

// Parses the training block shared by "train" and the verify studies.
// Returns the seed count separately when the block allows one.
TrainConfig parse_train(Section& s, std::size_t* seeds) {
  TrainConfig cfg;
  if (s.has("estimator")) {
    const auto name = s.required<std::string>("estimator");
    cfg.estimator = parse_estimator_kind(name);
  }
  cfg.epochs = s.optional("epochs", cfg.epochs);
  cfg.batch_pairs = s.optional("batch_pairs", cfg.batch_pairs);
  cfg.eval_tail_epochs = s.optional("eval_tail_epochs", cfg.eval_tail_epochs);
  cfg.alpha = s.optional("alpha", cfg.alpha);
  if (seeds != nullptr) *seeds = s.optional<std::size_t>("seeds", *seeds);
  if (s.has("model")) cfg.model = parse_model(s.child("model"), cfg.model);
  if (s.has("optimizer")) cfg.optimizer = parse_optimizer(s.child("optimizer"));
  cfg.validate();
  return cfg;
}

McCheckConfig parse_mc(Section s, std::vector<double>* alphas) {
  McCheckConfig mc;
  mc.pairs = s.required<std::size_t>("pairs");
  mc.trials = s.required<std::size_t>("trials");
  if (alphas != nullptr) *alphas = s.optional("alphas", *alphas);
  s.finish();
  if (mc.pairs == 0) throw ConfigError(s.where("pairs") + " must be positive");
  if (mc.trials < 100) throw ConfigError(s.where("trials") + " must be at least 100");
  return mc;
}

std::vector<NoiseCell> noise_grid(Section& s) {
  const auto scales = s.required<std::vector<double>>("prior_scales");
  const auto stds = s.required<std::vector<double>>("conf_noise_stds");
  if (scales.empty() || stds.empty()) throw ConfigError(s.where() + " noise axes must be non-empty");
  std::vector<NoiseCell> grid;
  for (double eps : scales) {
    for (double sigma : stds) {
      NoiseSpec probe{eps, sigma, 0};
      rethrow_as_config(s.where(), [&] { probe.validate(); return 0; });
      grid.push_back({eps, sigma});
    }
  }
  return grid;
}

VerifyConfig parse_verify(Section s) {
  VerifyConfig v;
  v.model = parse_model(s.child("model"), v.model);
  v.reference_draws = s.optional("reference_draws", v.reference_draws);
  v.unbiasedness = parse_mc(s.child("unbiasedness"), nullptr);
  v.lemma4 = parse_mc(s.child("lemma4"), nullptr);
  v.variance = parse_mc(s.child("variance"), &v.alphas);

  {
    Section c = s.child("convergence");
    v.convergence_n_grid = c.required<std::vector<std::size_t>>("n_grid");
    v.convergence_seeds = c.required<std::size_t>("seeds");
    Section t = c.child("train");
    v.convergence_train = rethrow_as_config(t.where(), [&] { return parse_train(t, nullptr); });
    t.finish();
    c.finish();
    const auto& g = v.convergence_n_grid;
    if (g.size() < 3) throw ConfigError(c.where("n_grid") + " needs at least three points");
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (g[i] <= g[i - 1]) throw ConfigError(c.where("n_grid") + " must be strictly increasing");
    }
    if (g.front() == 0 || g.back() < 16 * g.front()) {
      throw ConfigError(c.where("n_grid") + " must span at least a factor of 16");
    }
    if (v.convergence_seeds == 0) throw ConfigError(c.where("seeds") + " must be positive");
  }

  {
    Section r = s.child("robustness");
    v.robustness_pairs = r.required<std::size_t>("pairs");
    v.robustness_seeds = r.required<std::size_t>("seeds");
    v.robustness_grid = noise_grid(r);
    Section t = r.child("train");
    v.robustness_train = rethrow_as_config(t.where(), [&] { return parse_train(t, nullptr); });
    t.finish();
    r.finish();
    bool has_clean = false;
    for (const auto& cell : v.robustness_grid) {
      has_clean = has_clean || (cell.prior_scale == 1.0 && cell.conf_noise_std == 0.0);
    }
    if (!has_clean) throw ConfigError(r.where() + " grid must contain prior_scale 1 with conf_noise_std 0");
    if (v.robustness_pairs == 0) throw ConfigError(r.where("pairs") + " must be positive");
    if (v.robustness_seeds == 0) throw ConfigError(r.where("seeds") + " must be positive");
  }
  s.finish();

  bool has_half = false;
  for (double a : v.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("verify.variance.alphas must lie in [0, 1]");
    has_half = has_half || a == 0.5;
  }
  if (!has_half) throw ConfigError("verify.variance.alphas must contain 0.5");
  if (v.reference_draws == 0) throw ConfigError("verify.reference_draws must be positive");
  return v;
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "n_fraction") return SweepAxis::n_fraction;
  if (name == "prior") return SweepAxis::prior;
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "noise") return SweepAxis::noise;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

SweepConfig parse_sweep(Section s) {
  SweepConfig sw;
  sw.axis = parse_axis(s.required<std::string>("axis"));
  if (sw.axis == SweepAxis::noise) {
    sw.noise_grid = noise_grid(s);
  } else {
    sw.values = s.required<std::vector<double>>("values");
    if (sw.values.empty()) throw ConfigError(s.where("values") + " must be non-empty");
  }
  for (const auto& name : s.required<std::vector<std::string>>("estimators")) {
    sw.estimators.push_back(parse_estimator_kind(name));
  }
  s.finish();
  if (sw.estimators.empty()) throw ConfigError(s.where("estimators") + " must be non-empty");
  for (double v : sw.values) {
    switch (sw.axis) {
      case SweepAxis::n_fraction:
        if (!(v > 0.0 && v <= 1.0)) throw ConfigError("sweep.values: fractions must lie in (0, 1]");
        break;
      case SweepAxis::prior:
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("sweep.values: priors must lie in (0, 1)");
        break;
      case SweepAxis::alpha:
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweep.values: alphas must lie in [0, 1]");
        break;
      case SweepAxis::noise:
        break;
    }
  }
  if (sw.axis == SweepAxis::alpha) {
    for (auto e : sw.estimators) {
      if (e != EstimatorKind::confdiff_unbiased) {
        throw ConfigError("sweep.estimators: the alpha axis only applies to confdiff_unbiased");
      }
    }
  }
  if (sw.axis == SweepAxis::noise) {
    for (auto e : sw.estimators) {
      if (!uses_confdiff_data(e)) throw ConfigError("sweep.estimators: the noise axis needs ConfDiff estimators");
    }
  }
  return sw;
}

}  // namespace

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::n_fraction: return "n_fraction";
    case SweepAxis::prior: return "prior";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::noise: return "noise";
  }
  return "unknown";
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }

  Section root(doc, "");
  ExperimentConfig cfg;
  cfg.seed = root.required<std::uint64_t>("seed");
  cfg.distribution = parse_distribution(root.child("distribution"));

  {
    Section d = root.child("data");
    cfg.data.n_pairs = d.required<std::size_t>("n_pairs");
    cfg.data.n_test = d.required<std::size_t>("n_test");
    d.finish();
    if (cfg.data.n_pairs == 0) throw ConfigError("data.n_pairs must be positive");
    if (cfg.data.n_test == 0) throw ConfigError("data.n_test must be positive");
  }

  if (root.has("train")) {
    Section t = root.child("train");
    cfg.train = rethrow_as_config(t.where(), [&] { return parse_train(t, &cfg.train_seeds); });
    t.finish();
    if (cfg.train_seeds == 0) throw ConfigError("train.seeds must be positive");
  }

  if (root.has("noise")) {
    Section n = root.child("noise");
    cfg.noise.prior_scale = n.optional("prior_scale", cfg.noise.prior_scale);
    cfg.noise.conf_noise_std = n.optional("conf_noise_std", cfg.noise.conf_noise_std);
    n.finish();
    rethrow_as_config("noise", [&] { cfg.noise.validate(); return 0; });
  }

  if (root.has("verify")) {
    cfg.verify = rethrow_as_config("verify", [&] { return parse_verify(root.child("verify")); });
  }
  if (root.has("sweep")) {
    cfg.sweep = rethrow_as_config("sweep", [&] { return parse_sweep(root.child("sweep")); });
  }
  if (root.has("output")) {
    Section o = root.child("output");
    cfg.output_dir = o.optional<std::string>("dir", cfg.output_dir);
    o.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

namespace {

constexpr std::string_view kDistribution = R"(
  "distribution": {
    "mean_pos": [1.0, 1.0], "mean_neg": [-1.0, -1.0],
    "cov_diag_pos": [1.0, 1.0], "cov_diag_neg": [1.0, 1.0],
    "prior_pos": 0.5
  })";

constexpr std::string_view kVerify = R"(
  "verify": {
    "model": {"kind": "mlp", "hidden_widths": [64, 64, 64], "init_seed": 11},
    "reference_draws": 1000000,
    "unbiasedness": {"pairs": 200, "trials": 2000},
    "lemma4": {"pairs": 500, "trials": 2000},
    "variance": {"pairs": 200, "trials": 2000},
    "convergence": {
      "n_grid": [100, 400, 1600, 6400], "seeds": 10,
      "train": {"estimator": "confdiff_abs", "epochs": 1000, "batch_pairs": 8,
                "model": {"kind": "linear"}}
    },
    "robustness": {
      "pairs": 1000, "seeds": 5,
      "prior_scales": [0.8, 1.0, 1.2], "conf_noise_stds": [0.0, 0.2, 0.4],
      "train": {"estimator": "confdiff_abs", "epochs": 100, "batch_pairs": 256}
    }
  })";

constexpr std::string_view kCiVerify = R"(
  "verify": {
    "model": {"kind": "mlp", "hidden_widths": [16, 16], "init_seed": 11},
    "reference_draws": 100000,
    "unbiasedness": {"pairs": 50, "trials": 200},
    "lemma4": {"pairs": 50, "trials": 200},
    "variance": {"pairs": 50, "trials": 1000},
    "convergence": {
      "n_grid": [50, 200, 800], "seeds": 2,
      "train": {"estimator": "confdiff_abs", "epochs": 10, "batch_pairs": 64, "eval_tail_epochs": 2,
                "model": {"kind": "linear"}}
    },
    "robustness": {
      "pairs": 200, "seeds": 2,
      "prior_scales": [0.8, 1.0], "conf_noise_stds": [0.0, 0.2],
      "train": {"estimator": "confdiff_abs", "epochs": 5, "batch_pairs": 64, "eval_tail_epochs": 2,
                "model": {"kind": "linear"}}
    }
  })";

std::string assemble(std::string_view head, std::string_view verify, std::string_view tail) {
  std::string out = "{\n";
  out += head;
  out += ",";
  out += kDistribution;
  if (!verify.empty()) {
    out += ",";
    out += verify;
  }
  if (!tail.empty()) {
    out += ",";
    out += tail;
  }
  out += "\n}\n";
  return out;
}

}  // namespace

std::vector<std::string> preset_names() { return {"desk", "benchmark", "ci", "prior-sweep", "noise-sweep"}; }

std::string preset_json(std::string_view name) {
  if (name == "desk") {
    return assemble(R"(  "seed": 20230101,
  "data": {"n_pairs": 4000, "n_test": 5000},
  "train": {"estimator": "confdiff_abs", "epochs": 200, "batch_pairs": 256, "seeds": 5},
  "output": {"dir": "out/desk"})",
                    kVerify, "");
  }
  if (name == "benchmark") {
    return assemble(R"(  "seed": 20230101,
  "data": {"n_pairs": 15000, "n_test": 5000},
  "train": {"estimator": "confdiff_abs", "epochs": 200, "batch_pairs": 256, "seeds": 5},
  "output": {"dir": "out/benchmark"})",
                    kVerify, "");
  }
  if (name == "ci") {
    return assemble(R"(  "seed": 7,
  "data": {"n_pairs": 300, "n_test": 500},
  "train": {"estimator": "confdiff_abs", "epochs": 5, "batch_pairs": 64, "eval_tail_epochs": 2, "seeds": 2,
            "model": {"kind": "mlp", "hidden_widths": [16, 16]}},
  "output": {"dir": "out/ci"})",
                    kCiVerify, "");
  }
  if (name == "prior-sweep") {
    return assemble(R"(  "seed": 20230101,
  "data": {"n_pairs": 4000, "n_test": 5000},
  "train": {"estimator": "confdiff_abs", "epochs": 200, "batch_pairs": 256, "seeds": 5},
  "output": {"dir": "out/prior-sweep"})",
                    "", R"(  "sweep": {"axis": "prior", "values": [0.2, 0.5, 0.8],
            "estimators": ["confdiff_unbiased", "confdiff_relu", "confdiff_abs", "pcomp_unbiased"]})");
  }
  if (name == "noise-sweep") {
    return assemble(R"(  "seed": 20230101,
  "data": {"n_pairs": 4000, "n_test": 5000},
  "train": {"estimator": "confdiff_abs", "epochs": 200, "batch_pairs": 256, "seeds": 5},
  "output": {"dir": "out/noise-sweep"})",
                    "", R"(  "sweep": {"axis": "noise", "prior_scales": [0.8, 1.0, 1.2],
            "conf_noise_stds": [0.0, 0.2, 0.4], "estimators": ["confdiff_abs"]})");
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace confdiff
