// Acceptance criteria. Each criterion prints one PASS/FAIL line.
//   confdiff_acceptance                 run every criterion
//   confdiff_acceptance --criterion N   run criterion N only

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "confdiff/data_synth.hpp"
#include "confdiff/loss.hpp"
#include "confdiff/model.hpp"
#include "confdiff/risk.hpp"
#include "confdiff/rng.hpp"
#include "confdiff/trainer.hpp"
#include "confdiff/verify.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace confdiff;

namespace {

constexpr std::uint64_t kSeed = 20230101;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

GaussianMixtureSpec desk_spec(double prior = 0.5) {
  return GaussianMixtureSpec::isotropic({1.0, 1.0}, {-1.0, -1.0}, 1.0, prior);
}

ModelParams verify_model() {
  ModelSpec spec;
  spec.kind = ModelKind::mlp;
  spec.input_dim = 2;
  spec.hidden_widths = {64, 64, 64};
  spec.init_seed = 11;
  return init_model(spec);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1: mean of the unbiased estimator matches the true risk.
Outcome criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(kSeed).split("criterion_1");
  const MCReport r = mc_estimator_mean(desk_spec(), verify_model(), LossKind::logistic, EstimatorChoice::unbiased(),
                                       200, 2000, rng, 1'000'000, 1);
  const double elapsed = seconds_since(start);
  return {std::fabs(r.z_score) < 4.0 && elapsed < 120.0,
          "estimate " + fmt(r.estimate) + " reference " + fmt(r.reference) + " z " + fmt(r.z_score, 3) + ", " +
              fmt(elapsed, 3) + " s"};
}

// 2: the four pair-expectation identities.
Outcome criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(kSeed).split("criterion_2");
  const auto reports = check_lemma4(desk_spec(), verify_model(), LossKind::logistic, 2000, 500, rng);
  const double elapsed = seconds_since(start);
  bool ok = elapsed < 120.0;
  std::string detail = "z";
  for (const auto& r : reports) {
    ok = ok && std::fabs(r.z_score) < 4.0;
    detail += " " + fmt(r.z_score, 3);
  }
  return {ok, detail + ", " + fmt(elapsed, 3) + " s"};
}

// 3: Var(alpha) is minimized at 1/2 and symmetric about it.
Outcome criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> alphas;
  for (int k = 0; k <= 10; ++k) alphas.push_back(k / 10.0);
  Rng rng = Rng(kSeed).split("criterion_3");
  const VarianceProfile p = variance_profile(desk_spec(), verify_model(), LossKind::logistic, alphas, 200, 2000, rng);
  const double elapsed = seconds_since(start);
  const double v_half = p.variances[5];
  bool minimal = true;
  double worst_sym = 0.0;
  for (std::size_t k = 0; k <= 10; ++k) {
    minimal = minimal && v_half <= p.variances[k];
    const double a = p.variances[k];
    const double b = p.variances[10 - k];
    worst_sym = std::max(worst_sym, std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)));
  }
  return {minimal && worst_sym <= 1e-10 && elapsed < 120.0,
          "Var(0.5) " + fmt(v_half) + " Var(0) " + fmt(p.variances[0]) + " max symmetry gap " + fmt(worst_sym, 3) +
              ", " + fmt(elapsed, 3) + " s"};
}

// 4: corrected risk dominates the unbiased risk on random batches.
Outcome criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(kSeed).split("criterion_4");
  const double priors[] = {0.2, 0.5, 0.8};
  std::size_t violations = 0;
  std::size_t negative_unbiased = 0;
  double identity_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double prior = priors[i % 3];
    ModelSpec ms;
    ms.kind = rng.bernoulli(0.5) ? ModelKind::mlp : ModelKind::linear;
    ms.input_dim = 2;
    ms.hidden_widths = {1 + static_cast<std::size_t>(rng.uniform(0.0, 16.0))};
    ModelParams params = init_model(ms, rng);
    // Widen the score range so batches with negative terms are common.
    const double scale = rng.uniform(0.5, 20.0);
    for (double& v : params.values()) v *= scale;

    const auto n = 1 + static_cast<std::size_t>(rng.uniform(0.0, 64.0));
    const ConfDiffDataset data = make_confdiff_dataset(desk_spec(prior), n, rng);
    std::vector<PairScores> scores;
    for (const auto& p : data.pairs) scores.push_back({score(params, p.x), score(params, p.x_prime)});
    const std::vector<double> c = confidences(data);
    const ConfidenceBatch batch{c, prior};

    const double unbiased = confdiff_unbiased_risk(batch, scores, LossKind::logistic);
    const double identity = confdiff_corrected_risk(batch, scores, LossKind::logistic, CorrectionKind::identity);
    identity_gap = std::max(identity_gap, std::fabs(identity - unbiased));
    if (unbiased < 0.0) ++negative_unbiased;
    for (CorrectionKind f : {CorrectionKind::relu, CorrectionKind::abs}) {
      const double corrected = confdiff_corrected_risk(batch, scores, LossKind::logistic, f);
      if (!(corrected >= unbiased) || !(corrected >= 0.0)) ++violations;
    }
  }
  const double elapsed = seconds_since(start);
  return {violations == 0 && identity_gap <= 1e-12 && elapsed < 30.0,
          std::to_string(violations) + " dominance violations, identity gap " + fmt(identity_gap, 3) + ", " +
              std::to_string(negative_unbiased) + " batches with negative unbiased risk, " + fmt(elapsed, 3) + " s"};
}

// Smallest |pre-activation| over hidden layers; ReLU kinks sit at zero.
double kink_distance(const ForwardCache& cache) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l) {
    for (double v : cache.pre[l]) d = std::min(d, std::fabs(v));
  }
  return d;
}

double backward_check(ModelKind kind, Rng& rng) {
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    ModelSpec ms;
    ms.kind = kind;
    ms.input_dim = 3;
    ms.hidden_widths = {5, 4};
    ModelParams params = init_model(ms, rng);
    for (double& v : params.values()) v += rng.normal(0.0, 0.1);
    const Vector x{rng.normal(), rng.normal(), rng.normal()};
    ForwardCache cache;
    forward(params, x, cache);
    if (kink_distance(cache) < 1e-3) continue;
    const Vector grad = backward(params, cache, 1.0);
    for (std::size_t k = 0; k < params.parameter_count(); ++k) {
      ModelParams probe = params;
      const double fd = oracle::central_difference(
          [&](double v) {
            probe.values()[k] = v;
            return score(probe, x);
          },
          params.values()[k]);
      worst = std::max(worst, oracle::relative_error(grad[k], fd));
    }
    ++done;
  }
  return worst;
}

// 5: analytic gradients agree with central differences.
Outcome criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng = Rng(kSeed).split("criterion_5");

  double loss_worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double z = rng.uniform(-8.0, 8.0);
    const Label y = rng.bernoulli(0.5) ? Label::positive : Label::negative;
    const double fd = oracle::central_difference([&](double t) { return loss(LossKind::logistic, t, y); }, z);
    loss_worst = std::max(loss_worst, oracle::relative_error(loss_grad(LossKind::logistic, z, y), fd));
  }

  const double linear_worst = backward_check(ModelKind::linear, rng);
  const double mlp_worst = backward_check(ModelKind::mlp, rng);

  double risk_worst = 0.0;
  int done = 0;
  const CorrectionKind kinds[] = {CorrectionKind::identity, CorrectionKind::relu, CorrectionKind::abs};
  while (done < 50) {
    const auto n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 14.0));
    const double prior = rng.uniform(0.1, 0.9);
    std::vector<double> c(n);
    std::vector<PairScores> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = rng.uniform(-1.0, 1.0);
      scores[i] = {rng.normal(0.0, 3.0), rng.normal(0.0, 3.0)};
    }
    const ConfidenceBatch batch{c, prior};
    const CorrectionKind f = kinds[done % 3];
    const TermDecomposition t = confdiff_term_decomposition(batch, scores, LossKind::logistic);
    if (std::min({std::fabs(t.a_hat), std::fabs(t.b_hat), std::fabs(t.c_hat), std::fabs(t.d_hat)}) < 1e-3) continue;
    const auto grad = corrected_risk_grad(batch, scores, LossKind::logistic, f);
    for (std::size_t i = 0; i < n; ++i) {
      for (int side = 0; side < 2; ++side) {
        std::vector<PairScores> probe = scores;
        double& slot = side == 0 ? probe[i].x : probe[i].x_prime;
        const double at = slot;
        const double fd = oracle::central_difference(
            [&](double v) {
              slot = v;
              return confdiff_corrected_risk(batch, probe, LossKind::logistic, f);
            },
            at);
        const double analytic = side == 0 ? grad[i].x : grad[i].x_prime;
        risk_worst = std::max(risk_worst, oracle::relative_error(analytic, fd));
      }
    }
    ++done;
  }

  const double elapsed = seconds_since(start);
  const double worst = std::max({loss_worst, linear_worst, mlp_worst, risk_worst});
  return {worst < 1e-4 && elapsed < 60.0,
          "max relative error: loss " + fmt(loss_worst, 3) + ", linear " + fmt(linear_worst, 3) + ", mlp " +
              fmt(mlp_worst, 3) + ", corrected risk " + fmt(risk_worst, 3) + ", " + fmt(elapsed, 3) + " s"};
}

struct Sampled {
  ConfDiffDataset train;
  std::vector<LabeledExample> test;
};

Sampled sample(const std::string& stream, std::size_t n, std::size_t seed) {
  const Rng root = Rng(kSeed).split(stream).split(seed);
  Rng train_rng = root.split("train");
  Rng test_rng = root.split("test");
  return {make_confdiff_dataset(desk_spec(), n, train_rng), make_labeled_dataset(desk_spec(), 5000, test_rng)};
}

// Trains every seed in parallel; results are indexed by seed.
std::vector<RunResult> train_seeds(const std::string& stream, std::size_t n, std::size_t seeds, TrainConfig cfg) {
  std::vector<RunResult> results(seeds);
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(worker_count(), seeds);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t s = w; s < seeds; s += workers) {
        const Sampled data = sample(stream, n, s);
        TrainConfig run = cfg;
        run.seed = derive_seed(kSeed, s);
        results[s] = train(data.train, data.test, run);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

double mean_final_accuracy(const std::vector<RunResult>& runs) {
  double total = 0.0;
  for (const auto& r : runs) total += r.final_accuracy;
  return total / static_cast<double>(runs.size());
}

// 6: ConfDiff-ABS approaches the Bayes accuracy.
Outcome criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig cfg;
  cfg.estimator = EstimatorKind::confdiff_abs;
  cfg.epochs = 200;
  const auto runs = train_seeds("criterion_6", 4000, 5, cfg);
  const double elapsed = seconds_since(start);
  const double bayes = oracle::normal_cdf(std::sqrt(2.0));
  const double mean = mean_final_accuracy(runs);
  std::string detail = "mean final accuracy " + fmt(mean, 4) + " vs Bayes " + fmt(bayes, 4) + " - 0.02 (seeds";
  for (const auto& r : runs) detail += " " + fmt(r.final_accuracy, 4);
  return {mean >= bayes - 0.02 && elapsed < 600.0, detail + "), " + fmt(elapsed, 3) + " s"};
}

// 7: the unbiased risk goes negative on small data; the abs correction does not.
Outcome criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_pairs = 32;
  cfg.estimator = EstimatorKind::confdiff_unbiased;
  const auto unbiased = train_seeds("criterion_7", 200, 5, cfg);
  cfg.estimator = EstimatorKind::confdiff_abs;
  const auto corrected = train_seeds("criterion_7", 200, 5, cfg);
  const double elapsed = seconds_since(start);

  const bool goes_negative = unbiased[0].min_train_risk < 0.0;
  const bool stays_nonnegative = std::all_of(corrected[0].epochs.begin(), corrected[0].epochs.end(),
                                             [](const EpochRecord& e) { return e.train_risk >= 0.0; });
  const double mean_unbiased = mean_final_accuracy(unbiased);
  const double mean_abs = mean_final_accuracy(corrected);
  return {goes_negative && stays_nonnegative && mean_abs >= mean_unbiased && elapsed < 300.0,
          "seed 0 min risk: unbiased " + fmt(unbiased[0].min_train_risk, 4) + ", abs " +
              fmt(corrected[0].min_train_risk, 4) + "; mean accuracy abs " + fmt(mean_abs, 4) + " vs unbiased " +
              fmt(mean_unbiased, 4) + ", " + fmt(elapsed, 3) + " s"};
}

// 8: excess risk decreases with n at a rate between n^-0.75 and n^-0.25.
Outcome criterion_8() {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig base;
  base.estimator = EstimatorKind::confdiff_abs;
  base.model.kind = ModelKind::linear;
  base.epochs = 1000;
  base.batch_pairs = 8;
  base.seed = derive_seed(kSeed, stream_key("criterion_8"));
  StudyOptions options;
  options.seeds = 10;
  options.test_size = 5000;
  options.eval_draws = 1'000'000;
  options.jobs = worker_count();
  const ConvergenceReport r = convergence_study(desk_spec(), {100, 400, 1600, 6400}, base, options);
  const double elapsed = seconds_since(start);

  bool decreasing = true;
  std::string detail = "excess";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    detail += " " + fmt(r.points[i].mean_excess_risk, 3);
    if (i > 0) decreasing = decreasing && r.points[i].mean_excess_risk < r.points[i - 1].mean_excess_risk;
  }
  const bool in_band = r.slope >= -0.75 && r.slope <= -0.25;
  return {decreasing && in_band && elapsed < 600.0,
          detail + (decreasing ? " (decreasing)" : " (not decreasing)") + ", slope " + fmt(r.slope, 3) +
              ", " + fmt(elapsed, 3) + " s"};
}

// 9: noise grid. Only the clean-cell passthrough is asserted.
Outcome criterion_9() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<NoiseCell> grid;
  for (double eps : {0.8, 1.0, 1.2}) {
    for (double sigma : {0.0, 0.2, 0.4}) grid.push_back({eps, sigma});
  }
  TrainConfig base;
  base.estimator = EstimatorKind::confdiff_abs;
  base.epochs = 100;
  base.seed = derive_seed(kSeed, stream_key("criterion_9"));
  StudyOptions options;
  options.seeds = 5;
  options.test_size = 5000;
  options.eval_draws = 1'000'000;
  options.jobs = worker_count();
  const RobustnessReport r = robustness_study(desk_spec(), grid, base, 1000, options);
  const double elapsed = seconds_since(start);

  const RobustnessCell* clean = nullptr;
  for (const auto& c : r.cells) {
    if (c.noise.prior_scale == 1.0 && c.noise.conf_noise_std == 0.0) clean = &c;
  }
  bool clean_on_top = clean != nullptr;
  for (const auto& c : r.cells) {
    std::cout << "  eps " << c.noise.prior_scale << " sigma " << c.noise.conf_noise_std << ": accuracy "
              << fmt(c.mean_accuracy, 4) << " +- " << fmt(c.std_error, 2) << ", mean|c_noisy - c| "
              << fmt(c.mean_abs_confidence_error, 4) << '\n';
    if (clean != nullptr) {
      const double se = std::hypot(c.std_error, clean->std_error);
      clean_on_top = clean_on_top && clean->mean_accuracy >= c.mean_accuracy - 3.0 * se;
    }
  }
  return {r.clean_passthrough_exact && elapsed < 900.0,
          std::string("clean passthrough ") + (r.clean_passthrough_exact ? "exact" : "differs") +
              "; clean cell within 3 SE of the top: " + (clean_on_top ? "yes" : "no") + " (soft), " +
              fmt(elapsed, 3) + " s"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CONFDIFF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative paths that differ between two output trees, or exist in only one.
std::vector<std::string> tree_differences(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<std::string> diff;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) diff.push_back(rel.string());
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) {
      diff.push_back(fs::relative(e.path(), b).string());
    }
  }
  return diff;
}

// 10: every command reruns byte-identically.
Outcome criterion_10() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "confdiff_acceptance_10";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path sweep_config = root / "sweep.json";
  std::ofstream(sweep_config) << R"({
  "seed": 7,
  "distribution": {"mean_pos": [1, 1], "mean_neg": [-1, -1],
                   "cov_diag_pos": [1, 1], "cov_diag_neg": [1, 1], "prior_pos": 0.5},
  "data": {"n_pairs": 200, "n_test": 500},
  "train": {"epochs": 5, "batch_pairs": 64, "eval_tail_epochs": 2, "seeds": 2,
            "model": {"kind": "mlp", "hidden_widths": [16, 16]}},
  "sweep": {"axis": "noise", "prior_scales": [0.8, 1.0], "conf_noise_stds": [0.0, 0.2],
            "estimators": ["confdiff_abs", "confdiff_relu"]}
})";

  const std::vector<std::string> commands{
      "generate --preset ci",
      "train --preset ci",
      "verify unbiasedness --preset ci",
      "verify lemma4 --preset ci",
      "verify variance --preset ci",
      "verify convergence --preset ci",
      "verify robustness --preset ci",
      "sweep --config " + sweep_config.string(),
  };
  std::size_t files = 0;
  std::vector<std::string> diffs;
  bool exit_ok = true;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const fs::path a = root / ("a" + std::to_string(k));
    const fs::path b = root / ("b" + std::to_string(k));
    // Codes 0 and 1 both mean the command ran to completion.
    const int ca = run_cli(commands[k] + " --jobs 1 --out " + a.string());
    const int cb = run_cli(commands[k] + " --jobs 2 --out " + b.string());
    if (ca > 1 || cb > 1 || ca != cb) {
      exit_ok = false;
      diffs.push_back(commands[k] + " exited " + std::to_string(ca) + "/" + std::to_string(cb));
      continue;
    }
    for (auto& d : tree_differences(a, b, files)) diffs.push_back(commands[k] + ": " + d);
  }
  fs::remove_all(root);
  const double elapsed = seconds_since(start);
  std::string detail = std::to_string(commands.size()) + " commands, " + std::to_string(files) +
                       " files compared, " + std::to_string(diffs.size()) + " differences";
  for (const auto& d : diffs) detail += "; " + d;
  return {exit_ok && diffs.empty() && files > 0, detail + ", " + fmt(elapsed, 3) + " s"};
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"estimator mean matches the true risk", criterion_1},
      {"pair-expectation identities hold", criterion_2},
      {"alpha = 1/2 minimizes the estimator variance", criterion_3},
      {"corrected risk dominates the unbiased risk", criterion_4},
      {"analytic gradients match finite differences", criterion_5},
      {"ConfDiff-ABS reaches Bayes accuracy - 0.02", criterion_6},
      {"negative unbiased risk and its correction", criterion_7},
      {"excess risk rate", criterion_8},
      {"robustness grid", criterion_9},
      {"byte-identical reruns", criterion_10},
  };

  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > static_cast<int>(criteria.size())) {
        std::cerr << "criterion must lie in [1, " << criteria.size() << "]\n";
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    } else {
      std::cerr << "usage: confdiff_acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);
  }

  bool all = true;
  for (std::size_t n : selected) {
    const Criterion& c = criteria[n - 1];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << n << ": " << c.title << " (" << o.detail << ")"
              << std::endl;
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
