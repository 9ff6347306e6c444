#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "confdiff/dataset_io.hpp"
#include "confdiff/error.hpp"
#include "confdiff/parallel.hpp"
#include "confdiff/report.hpp"
#include "confdiff/rng.hpp"
#include "confdiff/verify.hpp"

namespace confdiff::cli {
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fill) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  fill(out);
  out.flush();
  if (!out) throw UsageError("failed writing " + path.string());
}

fs::path replicate_dir(const fs::path& root, std::size_t s) { return root / ("rep" + std::to_string(s)); }

double mean_abs_confidence(const ConfDiffDataset& data) {
  double acc = 0.0;
  for (const auto& p : data.pairs) acc += std::fabs(p.c);
  return acc / static_cast<double>(data.size());
}

std::vector<LabeledExample> read_labeled_file(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("missing dataset file " + path.string());
  return load_labeled(path.string());
}

template <typename T, typename Reader>
T read_file(const fs::path& path, Reader reader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("missing dataset file " + path.string());
  return reader(in);
}

Replicate load_replicate(const fs::path& dir) {
  Replicate r;
  r.confdiff = read_file<ConfDiffDataset>(dir / "confdiff.txt", [](std::istream& in) { return read_confdiff(in); });
  r.pcomp = read_file<PcompDataset>(dir / "pcomp.txt", [](std::istream& in) { return read_pcomp(in); });
  r.labeled = read_labeled_file(dir / "labeled.txt");
  r.soft = read_file<std::vector<SoftLabeledExample>>(dir / "soft.txt",
                                                      [](std::istream& in) { return read_soft_labeled(in); });
  r.test = read_labeled_file(dir / "test.txt");
  return r;
}

TrainConfig run_config(const ExperimentConfig& config, const TrainConfig& base, std::size_t s) {
  TrainConfig cfg = base;
  cfg.seed = run_seed(config, s);
  return cfg;
}

void write_summary(std::ostream& out, EstimatorKind estimator, const std::vector<RunResult>& runs) {
  std::vector<double> acc;
  double min_risk = runs.front().min_train_risk;
  for (const auto& r : runs) {
    acc.push_back(r.final_accuracy);
    min_risk = std::min(min_risk, r.min_train_risk);
  }
  const Summary s = summarize(acc);
  out << "estimator,seeds,mean_final_accuracy,std_final_accuracy,min_train_risk\n";
  out << to_string(estimator) << ',' << runs.size() << ',' << format_double(s.mean) << ','
      << format_double(s.std_dev) << ',' << format_double(min_risk) << '\n';
}

struct Check {
  std::string name;
  bool passed = false;
  bool hard = true;
  std::string detail;
};

void print_checks(std::ostream& log, const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    const char* tag = c.passed ? "PASS" : (c.hard ? "FAIL" : "WARN");
    log << tag << "  " << c.name;
    if (!c.detail.empty()) log << "  (" << c.detail << ")";
    log << '\n';
  }
}

bool all_hard_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.hard; });
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

const VerifyConfig& need_verify(const ExperimentConfig& config) {
  if (!config.verify) throw ConfigError("this command needs a \"verify\" section in the config");
  return *config.verify;
}

ModelParams verify_model(const ExperimentConfig& config) {
  ModelSpec spec = need_verify(config).model;
  spec.input_dim = config.distribution.dim;
  return init_model(spec);
}

void write_checks_json(JsonWriter& json, const std::vector<Check>& checks) {
  json.key("checks").begin_array();
  for (const auto& c : checks) {
    json.begin_object().field("name", c.name).field("passed", c.passed).field("hard", c.hard).end_object();
  }
  json.end_array();
}

std::vector<Check> suite_unbiasedness(const ExperimentConfig& config, JsonWriter& json, std::size_t jobs,
                                      std::ostream& log) {
  const VerifyConfig& v = need_verify(config);
  const ModelParams params = verify_model(config);
  const Rng root = Rng(config.seed).split("unbiasedness");
  const std::vector<EstimatorChoice> choices{EstimatorChoice::unbiased(), EstimatorChoice::weighted(0.3),
                                             EstimatorChoice::corrected(CorrectionKind::abs)};
  std::vector<Check> checks;
  json.key("reports").begin_array();
  for (std::size_t i = 0; i < choices.size(); ++i) {
    Rng rng = root.split(i);
    const MCReport r = mc_estimator_mean(config.distribution, params, LossKind::logistic, choices[i],
                                         v.unbiasedness.pairs, v.unbiasedness.trials, rng, v.reference_draws, jobs);
    write_json(json, r);
    log << "  " << r.name << ": estimate " << fmt(r.estimate) << " reference " << fmt(r.reference) << " z "
        << fmt(r.z_score) << '\n';
    if (choices[i].kind == EstimatorChoice::Kind::corrected) {
      checks.push_back({r.name + " bias is nonnegative", r.z_score > -4.0, true, "z=" + fmt(r.z_score)});
    } else {
      checks.push_back({r.name + " is unbiased", std::fabs(r.z_score) < 4.0, true, "z=" + fmt(r.z_score)});
    }
  }
  json.end_array();
  return checks;
}

std::vector<Check> suite_lemma4(const ExperimentConfig& config, JsonWriter& json, std::ostream& log) {
  const VerifyConfig& v = need_verify(config);
  const ModelParams params = verify_model(config);
  Rng rng = Rng(config.seed).split("lemma4");
  const auto reports = check_lemma4(config.distribution, params, LossKind::logistic, v.lemma4.trials, v.lemma4.pairs, rng);
  std::vector<Check> checks;
  json.key("reports").begin_array();
  for (const auto& r : reports) {
    write_json(json, r);
    log << "  " << r.name << ": lhs " << fmt(r.estimate) << " rhs " << fmt(r.reference) << " z " << fmt(r.z_score)
        << '\n';
    checks.push_back({r.name, std::fabs(r.z_score) < 4.0, true, "z=" + fmt(r.z_score)});
  }
  json.end_array();
  return checks;
}

std::vector<Check> suite_variance(const ExperimentConfig& config, JsonWriter& json, std::ostream& log) {
  const VerifyConfig& v = need_verify(config);
  const ModelParams params = verify_model(config);
  Rng rng = Rng(config.seed).split("variance");
  const VarianceProfile p = variance_profile(config.distribution, params, LossKind::logistic, v.alphas,
                                             v.variance.pairs, v.variance.trials, rng);
  json.key("profile");
  write_json(json, p);

  log << "  alpha        variance\n";
  for (std::size_t k = 0; k < p.alphas.size(); ++k) {
    log << "  " << std::setw(5) << p.alphas[k] << "  " << std::setprecision(10) << p.variances[k] << '\n';
  }
  log << std::setprecision(6);

  const auto half = std::find(p.alphas.begin(), p.alphas.end(), 0.5) - p.alphas.begin();
  const double v_half = p.variances[static_cast<std::size_t>(half)];
  bool minimal = true;
  double worst_sym = 0.0;
  for (std::size_t k = 0; k < p.alphas.size(); ++k) {
    minimal = minimal && v_half <= p.variances[k];
    for (std::size_t j = 0; j < p.alphas.size(); ++j) {
      if (std::fabs(p.alphas[j] - (1.0 - p.alphas[k])) < 1e-12) {
        const double scale = std::max(std::fabs(p.variances[k]), std::fabs(p.variances[j]));
        if (scale > 0.0) worst_sym = std::max(worst_sym, std::fabs(p.variances[k] - p.variances[j]) / scale);
      }
    }
  }
  return {
      {"Var(0.5) is minimal over the alpha grid", minimal, true, "Var(0.5)=" + fmt(v_half)},
      {"Var(alpha) = Var(1 - alpha)", worst_sym <= 1e-10, true, "max relative gap " + fmt(worst_sym)},
      {"alpha = 0.5 column equals the unbiased estimator", p.half_column_max_abs_diff <= 1e-12, true,
       "max gap " + fmt(p.half_column_max_abs_diff)},
      {"quadratic coefficient is nonnegative", p.quadratic_coefficient >= 0.0, true,
       "coef=" + fmt(p.quadratic_coefficient)},
  };
}

std::vector<Check> suite_convergence(const ExperimentConfig& config, JsonWriter& json, std::size_t jobs,
                                     std::ostream& log) {
  const VerifyConfig& v = need_verify(config);
  TrainConfig base = v.convergence_train;
  base.seed = derive_seed(config.seed, stream_key("convergence"));
  StudyOptions options;
  options.seeds = v.convergence_seeds;
  options.test_size = config.data.n_test;
  options.eval_draws = v.reference_draws;
  options.jobs = jobs;
  const ConvergenceReport r = convergence_study(config.distribution, v.convergence_n_grid, base, options);
  json.key("report");
  write_json(json, r);

  bool decreasing = true;
  log << "  n        mean excess risk\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    log << "  " << std::setw(7) << r.points[i].n << "  " << fmt(r.points[i].mean_excess_risk) << '\n';
    if (i > 0) decreasing = decreasing && r.points[i].mean_excess_risk < r.points[i - 1].mean_excess_risk;
  }
  const bool in_band = r.slope >= -0.75 && r.slope <= -0.25;
  return {
      {"mean excess risk strictly decreasing in n", decreasing, true, ""},
      {"log-log slope in [-0.75, -0.25]", in_band, true, "slope=" + fmt(r.slope)},
  };
}

std::vector<Check> suite_robustness(const ExperimentConfig& config, JsonWriter& json, std::size_t jobs,
                                    std::ostream& log) {
  const VerifyConfig& v = need_verify(config);
  TrainConfig base = v.robustness_train;
  base.seed = derive_seed(config.seed, stream_key("robustness"));
  StudyOptions options;
  options.seeds = v.robustness_seeds;
  options.test_size = config.data.n_test;
  options.eval_draws = v.reference_draws;
  options.jobs = jobs;
  const RobustnessReport r = robustness_study(config.distribution, v.robustness_grid, base, v.robustness_pairs, options);
  json.key("report");
  write_json(json, r);

  log << "  eps    sigma  mean_acc   std_err    mean|c_noisy - c|\n";
  const RobustnessCell* clean = nullptr;
  for (const auto& c : r.cells) {
    log << "  " << std::setw(5) << c.noise.prior_scale << "  " << std::setw(5) << c.noise.conf_noise_std << "  "
        << std::setw(9) << fmt(c.mean_accuracy) << "  " << std::setw(9) << fmt(c.std_error) << "  "
        << fmt(c.mean_abs_confidence_error) << '\n';
    if (c.noise.prior_scale == 1.0 && c.noise.conf_noise_std == 0.0) clean = &c;
  }

  std::vector<Check> checks{{"clean cell reproduces plain training bit-exactly", r.clean_passthrough_exact, true, ""}};
  bool clean_on_top = true;
  for (const auto& c : r.cells) {
    const double se = std::sqrt(c.std_error * c.std_error + clean->std_error * clean->std_error);
    clean_on_top = clean_on_top && clean->mean_accuracy >= c.mean_accuracy - 3.0 * se;
  }
  checks.push_back({"clean cell within 3 SE of the top of the grid", clean_on_top, false, ""});

  const RobustnessCell* sigma_cell = nullptr;
  for (const auto& c : r.cells) {
    if (c.noise.prior_scale == 1.0 && c.noise.conf_noise_std == 0.2) sigma_cell = &c;
  }
  if (sigma_cell != nullptr) {
    bool prior_hurts_more = true;
    bool any = false;
    for (const auto& c : r.cells) {
      if (c.noise.conf_noise_std == 0.0 && c.noise.prior_scale != 1.0) {
        any = true;
        prior_hurts_more = prior_hurts_more && c.mean_accuracy < sigma_cell->mean_accuracy;
      }
    }
    if (any) checks.push_back({"prior misspecification hurts more than sigma = 0.2", prior_hurts_more, false, ""});
  }
  return checks;
}

struct SweepCell {
  EstimatorKind estimator = EstimatorKind::confdiff_abs;
  double value = 0.0;
  NoiseCell noise;
};

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> suites{"unbiasedness", "lemma4", "variance", "convergence", "robustness",
                                               "all"};
  return suites;
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t replicate) {
  return derive_seed(derive_seed(config.seed, stream_key("run")), replicate);
}

Replicate make_replicate(const ExperimentConfig& config, const GaussianMixtureSpec& spec, std::size_t n_pairs,
                         const NoiseSpec& noise, std::size_t replicate) {
  const Rng root = Rng(config.seed).split("data").split(replicate);
  Replicate r;
  Rng confdiff_rng = root.split("confdiff");
  Rng pcomp_rng = root.split("pcomp");
  Rng labeled_rng = root.split("labeled");
  Rng soft_rng = root.split("soft");
  Rng test_rng = root.split("test");
  r.confdiff = make_confdiff_dataset(spec, n_pairs, confdiff_rng);
  r.pcomp = make_pcomp_dataset(spec, n_pairs, pcomp_rng);
  r.labeled = make_labeled_dataset(spec, 2 * n_pairs, labeled_rng);
  r.soft = make_soft_labeled_dataset(spec, 2 * n_pairs, soft_rng);
  r.test = make_labeled_dataset(spec, config.data.n_test, test_rng);
  if (!noise.is_clean()) {
    NoiseSpec seeded = noise;
    seeded.seed = derive_seed(derive_seed(config.seed, stream_key("noise")), replicate);
    Rng noise_rng(seeded.seed);
    ConfDiffDataset noisy = corrupt_confidences(r.confdiff, seeded, noise_rng);
    noisy.class_prior = corrupt_prior(r.confdiff.class_prior, seeded);
    r.mean_abs_confidence_error = mean_abs_confidence_error(r.confdiff, noisy);
    r.confdiff = std::move(noisy);
    r.pcomp.class_prior = corrupt_prior(r.pcomp.class_prior, seeded);
  }
  return r;
}

TrainingData training_data_for(EstimatorKind estimator, const Replicate& replicate) {
  switch (estimator) {
    case EstimatorKind::confdiff_unbiased:
    case EstimatorKind::confdiff_relu:
    case EstimatorKind::confdiff_abs: return replicate.confdiff;
    case EstimatorKind::pcomp_unbiased: return replicate.pcomp;
    case EstimatorKind::soft_label: return replicate.soft;
    case EstimatorKind::supervised_hard: return replicate.labeled;
  }
  throw ConfigError("unknown estimator");
}

int cmd_generate(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log) {
  const fs::path root(out_dir);
  ensure_dir(root);
  for (std::size_t s = 0; s < config.train_seeds; ++s) {
    const Replicate r = make_replicate(config, config.distribution, config.data.n_pairs, config.noise, s);
    const fs::path dir = replicate_dir(root, s);
    ensure_dir(dir);
    write_file(dir / "confdiff.txt", [&](std::ostream& out) { write_confdiff(out, r.confdiff); });
    write_file(dir / "pcomp.txt", [&](std::ostream& out) { write_pcomp(out, r.pcomp); });
    write_file(dir / "labeled.txt", [&](std::ostream& out) { write_labeled(out, r.labeled); });
    write_file(dir / "soft.txt", [&](std::ostream& out) { write_soft_labeled(out, r.soft); });
    write_file(dir / "test.txt", [&](std::ostream& out) { write_labeled(out, r.test); });
    log << "rep" << s << ": n=" << r.confdiff.size() << " prior=" << format_double(r.confdiff.class_prior)
        << " mean|c|=" << format_double(mean_abs_confidence(r.confdiff)) << '\n';
  }
  return kOk;
}

int cmd_train(const ExperimentConfig& config, const std::string& out_dir, const std::string& data_dir,
              std::size_t jobs, std::ostream& log) {
  const std::size_t seeds = config.train_seeds;
  std::vector<Replicate> replicates(seeds);
  for (std::size_t s = 0; s < seeds; ++s) {
    replicates[s] = data_dir.empty()
                        ? make_replicate(config, config.distribution, config.data.n_pairs, config.noise, s)
                        : load_replicate(replicate_dir(data_dir, s));
  }
  // Fail on estimator/data mismatch before any training starts.
  for (const auto& r : replicates) check_compatible(config.train.estimator, training_data_for(config.train.estimator, r));

  std::vector<RunResult> results(seeds);
  parallel_for(seeds, jobs, [&](std::size_t s) {
    results[s] = train(training_data_for(config.train.estimator, replicates[s]), replicates[s].test,
                       run_config(config, config.train, s));
  });

  const fs::path root(out_dir);
  ensure_dir(root);
  for (std::size_t s = 0; s < seeds; ++s) {
    write_file(root / ("run_" + std::to_string(s) + ".csv"),
               [&](std::ostream& out) { write_run_records(out, results[s]); });
    write_file(root / ("run_" + std::to_string(s) + ".json"),
               [&](std::ostream& out) { write_run_json(out, results[s]); });
    log << "seed " << s << ": final_accuracy " << format_double(results[s].final_accuracy) << " min_train_risk "
        << format_double(results[s].min_train_risk) << '\n';
  }
  write_file(root / "summary.csv", [&](std::ostream& out) { write_summary(out, config.train.estimator, results); });
  write_summary(log, config.train.estimator, results);
  return kOk;
}

int cmd_verify(const std::string& suite, const ExperimentConfig& config, const std::string& out_dir,
               std::size_t jobs, std::ostream& log) {
  const auto& known = verify_suites();
  if (std::find(known.begin(), known.end(), suite) == known.end()) throw UsageError("unknown suite '" + suite + "'");
  need_verify(config);

  std::vector<std::string> run;
  if (suite == "all") {
    run.assign(known.begin(), known.end() - 1);
  } else {
    run.push_back(suite);
  }

  const fs::path root(out_dir);
  ensure_dir(root);
  bool ok = true;
  for (const auto& name : run) {
    log << "== " << name << '\n';
    std::ostringstream doc;
    JsonWriter json(doc);
    json.begin_object().field("suite", name);
    std::vector<Check> checks;
    if (name == "unbiasedness") checks = suite_unbiasedness(config, json, jobs, log);
    if (name == "lemma4") checks = suite_lemma4(config, json, log);
    if (name == "variance") checks = suite_variance(config, json, log);
    if (name == "convergence") checks = suite_convergence(config, json, jobs, log);
    if (name == "robustness") checks = suite_robustness(config, json, jobs, log);
    write_checks_json(json, checks);
    json.field("passed", all_hard_pass(checks)).end_object();
    doc << '\n';
    write_file(root / ("verify_" + name + ".json"), [&](std::ostream& out) { out << doc.str(); });
    print_checks(log, checks);
    ok = ok && all_hard_pass(checks);
  }
  return ok ? kOk : kAssertionFailed;
}

int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir, std::size_t jobs, std::ostream& log) {
  if (!config.sweep) throw ConfigError("sweep needs a \"sweep\" section in the config");
  const SweepConfig& sweep = *config.sweep;

  std::vector<SweepCell> cells;
  for (auto estimator : sweep.estimators) {
    if (sweep.axis == SweepAxis::noise) {
      for (const auto& n : sweep.noise_grid) cells.push_back({estimator, 0.0, n});
    } else {
      for (double v : sweep.values) cells.push_back({estimator, v, {}});
    }
  }
  if (cells.empty()) throw UsageError("sweep axis is empty");

  const std::size_t seeds = config.train_seeds;
  std::vector<RunResult> results(cells.size() * seeds);
  std::vector<double> conf_error(results.size(), 0.0);
  parallel_for(results.size(), jobs, [&](std::size_t r) {
    const SweepCell& cell = cells[r / seeds];
    const std::size_t s = r % seeds;
    GaussianMixtureSpec spec = config.distribution;
    std::size_t n = config.data.n_pairs;
    NoiseSpec noise = config.noise;
    TrainConfig cfg = run_config(config, config.train, s);
    cfg.estimator = cell.estimator;
    switch (sweep.axis) {
      case SweepAxis::n_fraction:
        n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cell.value * static_cast<double>(n))));
        break;
      case SweepAxis::prior: spec.prior_pos = cell.value; break;
      case SweepAxis::alpha: cfg.alpha = cell.value; break;
      case SweepAxis::noise:
        noise.prior_scale = cell.noise.prior_scale;
        noise.conf_noise_std = cell.noise.conf_noise_std;
        break;
    }
    const Replicate rep = make_replicate(config, spec, n, noise, s);
    conf_error[r] = rep.mean_abs_confidence_error;
    results[r] = train(training_data_for(cell.estimator, rep), rep.test, cfg);
  });

  const fs::path root(out_dir);
  const fs::path cell_dir = root / "cells";
  ensure_dir(cell_dir);
  std::ostringstream matrix;
  if (sweep.axis == SweepAxis::noise) {
    matrix << "estimator,prior_scale,conf_noise_std,mean_accuracy,std_accuracy,mean_abs_confidence_error\n";
  } else {
    matrix << "estimator," << to_string(sweep.axis) << ",mean_accuracy,std_accuracy\n";
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::vector<double> acc;
    double err = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      acc.push_back(results[k * seeds + s].final_accuracy);
      err += conf_error[k * seeds + s];
    }
    err /= static_cast<double>(seeds);
    const Summary sum = summarize(acc);
    const SweepCell& cell = cells[k];

    std::ostringstream doc;
    JsonWriter json(doc);
    json.begin_object().field("estimator", to_string(cell.estimator)).field("axis", to_string(sweep.axis));
    if (sweep.axis == SweepAxis::noise) {
      json.field("prior_scale", cell.noise.prior_scale).field("conf_noise_std", cell.noise.conf_noise_std);
      json.field("mean_abs_confidence_error", err);
    } else {
      json.field("value", cell.value);
    }
    json.field("accuracies", acc).field("mean_accuracy", sum.mean).field("std_accuracy", sum.std_dev).end_object();
    doc << '\n';
    write_file(cell_dir / ("cell_" + std::to_string(k) + ".json"), [&](std::ostream& out) { out << doc.str(); });

    matrix << to_string(cell.estimator) << ',';
    if (sweep.axis == SweepAxis::noise) {
      matrix << format_double(cell.noise.prior_scale) << ',' << format_double(cell.noise.conf_noise_std) << ','
             << format_double(sum.mean) << ',' << format_double(sum.std_dev) << ',' << format_double(err) << '\n';
    } else {
      matrix << format_double(cell.value) << ',' << format_double(sum.mean) << ',' << format_double(sum.std_dev)
             << '\n';
    }
  }
  write_file(root / "matrix.csv", [&](std::ostream& out) { out << matrix.str(); });
  log << matrix.str();
  return kOk;
}

}  // namespace confdiff::cli
