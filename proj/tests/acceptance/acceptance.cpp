// Acceptance checks AC1-AC11. Prints one PASS/FAIL line per criterion with the
// measured quantities, and exits nonzero if any criterion fails.

#include "../unit/oracles.hpp"

#include <qconc/config.hpp>
#include <qconc/diagnostics.hpp>
#include <qconc/experiment.hpp>
#include <qconc/hypotest.hpp>
#include <qconc/optimizers.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qconc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  double limit_seconds;
  std::function<Outcome()> check;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path scratch_root() {
  const auto p = fs::temp_directory_path() / "qconc_acceptance";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// AC1 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
  std::mt19937_64 gen(101);
  const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 4 + static_cast<std::size_t>(i) % 7;
    const auto conv = i % 2 == 0 ? RotationConvention::half_angle : RotationConvention::full_angle;
    const auto a = oracle::random_angles(gen, n);
    const auto b = oracle::random_angles(gen, n);
    const auto psi = oracle::statevector(a, conv);
    const std::uint64_t mask = gen() & oracle::prefix(n);
    worst = std::max(worst, std::abs(z_parity_expectation(Angles(a), mask, conv) - oracle::z_parity(psi, mask)));
    worst = std::max(worst, std::abs(fidelity_kernel_probability(Angles(a), Angles(b), conv) -
                                     oracle::overlap(psi, oracle::statevector(b, conv))));
    const auto spectrum = oracle::diagonal_spectrum(psi, n, c);
    const auto povm = cvar_eigenvalue_povm(c, Angles(a), conv);
    if (povm.distribution.size() != spectrum.size()) return {false, "outcome count mismatch"};
    std::size_t k = 0;
    for (const auto& [value, prob] : spectrum) {
      worst = std::max(worst, std::abs(povm.distribution.label(k) - value));
      worst = std::max(worst, std::abs(povm.distribution.probability(k) - prob));
      ++k;
    }
  }
  return {worst <= 1e-10, "max abs deviation " + fmt(worst) + " over 100 instances (tol 1e-10)"};
}

// AC2 ------------------------------------------------------------------------
Outcome gradient_fidelity() {
  std::mt19937_64 gen(202);
  const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 4 + static_cast<std::size_t>(i) % 3;
    const auto conv = i % 2 == 0 ? RotationConvention::half_angle : RotationConvention::full_angle;
    const Observable obs = i % 4 < 2 ? Observable::global_z(n) : Observable::cvar_hamiltonian(n, c);
    const Angles th(oracle::random_angles(gen, n));
    const auto ev = LossEvaluator::mean(obs, ShotBudget::infinite(), conv);
    const auto g = parameter_shift_gradient(th, ev, default_shift_rule(conv), StepStreams(0, 0, 1));
    for (std::size_t k = 0; k < n; ++k) {
      const double fd =
          (loss_exact(th.shifted(k, h), obs, conv) - loss_exact(th.shifted(k, -h), obs, conv)) / (2 * h);
      worst = std::max(worst, std::abs(g[k] - fd));
    }
  }
  return {worst <= 1e-6, "max |shift - central difference| " + fmt(worst) + " over 50 instances (tol 1e-6)"};
}

// AC3 ------------------------------------------------------------------------
Outcome likelihood_test() {
  const auto p = DiscreteDistribution::explicit_probabilities({0.75, 0.25});
  const auto q = DiscreteDistribution::explicit_probabilities({0.25, 0.75});
  RngStream rng(303, 0);
  const auto base = simulate_hypothesis_test(p, q, 1, 10000, rng);
  const double sigma = std::sqrt(0.75 * 0.25 / 10000.0);
  const bool first = std::abs(base.rate - 0.75) <= 3.0 * sigma;

  std::size_t violations = 0;
  double worst_z = -INFINITY;
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream draw(303, 1000 + i);
    auto random_dist = [&] {
      std::vector<double> v(4);
      double s = 0.0;
      for (double& x : v) s += (x = draw.uniform01() + 1e-3);
      for (double& x : v) x /= s;
      return DiscreteDistribution::explicit_probabilities(v);
    };
    const auto a = random_dist();
    const auto b = random_dist();
    const std::uint64_t shots = 1 + i % 5;
    const auto r = simulate_hypothesis_test(a, b, shots, 10000, draw);
    const double se = std::max(r.standard_error(), 1.0 / 10000.0);
    const double z = (r.rate - r.bound) / se;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++violations;
  }
  return {first && violations == 0, "N=1 rate " + fmt(base.rate) + " (0.75 +- " + fmt(3 * sigma) +
                                        "); random pairs above bound by >3 sigma: " + std::to_string(violations) +
                                        ", max z " + fmt(worst_z)};
}

// AC4 ------------------------------------------------------------------------
Outcome parity_exactness() {
  bool analytic = true;
  for (std::uint64_t n = 1; n <= 20; ++n) analytic = analytic && parity_test_error(n) == std::ldexp(1.0, -static_cast<int>(n) - 1);
  RngStream rng(404, 0);
  const auto mc = simulate_parity_test(16, 3, 100000, rng);
  const double sigma = std::sqrt(0.0625 * 0.9375 / 100000.0);
  const bool mc_ok = std::abs(mc.rate - 0.0625) <= 3.0 * sigma;
  const auto fam = indistinguishable_family(1ULL << 16);
  const double bound = many_sample_success_bound(fam.parameterised, fam.fixed, 100);
  const double expected = 0.5 + 100.0 / std::ldexp(1.0, 18);
  const bool bound_ok = std::abs(bound - expected) <= 4.0 * std::numeric_limits<double>::epsilon();
  return {analytic && mc_ok && bound_ok, "analytic 2^-(N+1) " + std::string(analytic ? "exact" : "MISMATCH") +
                                             "; MC N=3 " + fmt(mc.rate) + " (0.0625 +- " + fmt(3 * sigma) +
                                             "); bound " + fmt(bound) + " vs " + fmt(expected)};
}

// AC5 ------------------------------------------------------------------------
Outcome concentration_scaling() {
  std::vector<std::pair<double, double>> table;
  double beta10 = 0.0;
  double se10 = 0.0;
  for (std::size_t n : {6, 8, 10, 12}) {
    const auto r = estimate_outcome_variance(pauli_term_povm({1.0, Observable::prefix_mask(n)}), uniform_angle_sampler(n), 10000,
                                             ExactProbabilities{}, 505);
    table.emplace_back(static_cast<double>(n), r.beta_hat);
    if (n == 10) {
      beta10 = r.beta_hat;
      se10 = r.beta_hat_standard_error;
    }
  }
  const auto fit = concentration_scaling_fit(table);
  const bool slope_ok = std::abs(fit.slope + 1.0) <= 0.1;
  const bool value_ok = std::abs(beta10 - 2.44e-4) <= 3.0 * se10;
  return {slope_ok && value_ok, "slope " + fmt(fit.slope) + " (-1 +- 0.1); beta(n=10) " + fmt(beta10) + " vs 2.44e-4 +- " +
                                    fmt(3 * se10)};
}

// AC6 ------------------------------------------------------------------------
Outcome random_walk() {
  OptimizerConfig c;
  c.method = Method::gd;
  c.num_qubits = 15;
  c.learning_rate = 0.1;
  c.steps = 300;
  c.shots = ShotBudget::finite(150);
  std::vector<TrainingTrajectory> ens(100);
  detail::parallel_for(ens.size(), 1, [&](std::size_t i) { ens[i] = run_training(c, 2024, i); });
  const auto r = random_walk_statistics(ens, c);
  const double predicted = 0.01 / 300.0;
  std::size_t mean_out = 0;
  std::size_t var_out = 0;
  double worst_ratio = 1.0;
  for (std::size_t t = 0; t < r.steps; ++t) {
    if (std::abs(r.step_mean[t]) > 3.0 * r.step_mean_standard_error[t]) ++mean_out;
    const double ratio = r.step_variance[t] / predicted;
    if (std::abs(ratio - 1.0) > 0.2) ++var_out;
    if (std::abs(ratio - 1.0) > std::abs(worst_ratio - 1.0)) worst_ratio = ratio;
  }
  const bool ok = mean_out == 0 && var_out == 0 && r.cumulative_r_squared > 0.95 &&
                  std::abs(r.predicted_variance - predicted) < 1e-15;
  return {ok, "steps with |mean| > 3 SE: " + std::to_string(mean_out) + "/300; steps with variance off by >20%: " +
                  std::to_string(var_out) + "/300 (worst ratio " + fmt(worst_ratio) + "); cumulative R^2 " +
                  fmt(r.cumulative_r_squared)};
}

// AC7 ------------------------------------------------------------------------
double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome qualitative_reproduction() {
  std::vector<ExperimentConfig> grid;
  auto gd = detail::fig4_preset("fig4-gd", Method::gd, 0.05);
  grid.push_back(gd);
  for (const char* name : {"fig4-qng", "fig4-cvar", "fig4-nn", "fig4-rps"}) grid.push_back(preset(name));
  bool all = true;
  std::string detail_text;
  const auto t0 = std::chrono::steady_clock::now();
  for (auto cfg : grid) {
    cfg.output_dir = (scratch_root() / ("ac7_" + cfg.name)).string();
    fs::remove_all(cfg.output_dir);
    const auto result = run_experiment(cfg);
    if (!result.ok()) return {false, cfg.name + " failed: " + result.errors.front()};
    double initial = 0.0, l10n = 0.0, l2n = 0.0, linf = 0.0;
    bool strictly = true;
    for (const auto& cell : result.cells) {
      if (cell.num_qubits != 15) continue;
      std::vector<double> first, last;
      for (const auto& e : cell.exact_losses) {
        first.push_back(e.front());
        last.push_back(e.back());
      }
      const double final_median = median_of(last);
      switch (cell.shots.kind()) {
        case ShotToken::Kind::linear:
          l10n = final_median;
          initial = median_of(first);
          break;
        case ShotToken::Kind::exponential: l2n = final_median; break;
        case ShotToken::Kind::infinite:
          for (const auto& e : cell.exact_losses) {
            for (std::size_t s = 1; s < e.size(); ++s) strictly = strictly && e[s] < e[s - 1];
          }
          linf = final_median;
          break;
        default: break;
      }
    }
    const bool order = linf <= l2n && l2n <= l10n;
    const bool flat = std::abs(l10n - initial) <= 0.1;
    const bool ok = order && flat && strictly;
    all = all && ok;
    detail_text += "\n    " + std::string(to_string(cfg.training.method)) + ": " + (ok ? "ok" : "violated") +
                   "  L0=" + fmt(initial) + " L(10n)=" + fmt(l10n) + " L(2^n)=" + fmt(l2n) + " L(inf)=" + fmt(linf) +
                   " order=" + (order ? "yes" : "no") + " flat10n=" + (flat ? "yes" : "no") +
                   " inf-strict=" + (strictly ? "yes" : "no");
    fs::remove_all(cfg.output_dir);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {all, "full grid n in {9..17} x {10n, 2^n, inf} x 5 methods in " + fmt(elapsed) + " s" + detail_text};
}

// AC8 ------------------------------------------------------------------------
Outcome qng_equivalence() {
  std::mt19937_64 gen(808);
  std::size_t identical = 0;
  for (int i = 0; i < 20; ++i) {
    OptimizerConfig q;
    q.method = Method::qng;
    q.num_qubits = 3 + gen() % 10;
    q.learning_rate = 0.005 * static_cast<double>(1 + gen() % 8);
    q.steps = 25;
    const std::uint64_t shots_pick = gen() % 3;
    q.shots = shots_pick == 0 ? ShotBudget::infinite() : ShotBudget::finite(10 * (1 + gen() % 50));
    auto g = q;
    g.method = Method::gd;
    g.learning_rate = 4.0 * q.learning_rate;
    const std::uint64_t seed = gen();
    const auto a = run_training(q, seed, i);
    const auto b = run_training(g, seed, i);
    if (a.thetas == b.thetas && a.loss_estimates == b.loss_estimates) ++identical;
  }
  return {identical == 20, std::to_string(identical) + "/20 configurations bitwise identical"};
}

// AC9 ------------------------------------------------------------------------
Outcome rps_factor() {
  const bool base = rps_lambda(2, 1) == 0.25;
  bool monotone = true;
  for (double d : {2.0, 512.0, 32768.0}) {
    double prev = 0.0;
    for (double n = 1; n <= 1e6; n *= 3) {
      const double l = rps_lambda(d, n);
      monotone = monotone && l > prev;
      prev = l;
    }
  }
  OptimizerConfig r;
  r.method = Method::rps;
  r.num_qubits = 9;
  r.learning_rate = 0.05;
  r.steps = 100;
  auto g = r;
  g.method = Method::gd;
  const bool same = run_training(r, 9, 0).thetas == run_training(g, 9, 0).thetas;
  return {base && monotone && same, "lambda(2,1)=" + fmt(rps_lambda(2, 1)) + ", monotone " + (monotone ? "yes" : "no") +
                                        ", infinite-shot RPS == GD " + (same ? "yes" : "no")};
}

// AC10 -----------------------------------------------------------------------
Outcome certificate() {
  const auto c = indistinguishability_certificate(std::ldexp(1.0, -40), 2, 100);
  // |M| sqrt(beta) = 2^-19 and N |M| beta^(1/4) / 4 = 25/512.
  const double delta = std::ldexp(1.0, -19);
  const double eps = 25.0 / 512.0;
  const bool exact = std::abs(c.delta - delta) <= 1e-12 * delta && std::abs(c.epsilon - eps) <= 1e-12 * eps;
  const bool rounded = std::abs(c.delta - 1.91e-6) < 0.005e-6 && std::abs(c.epsilon - 0.0488) < 0.00005;
  const bool vacuous = indistinguishability_certificate(1.0, 2, 100).vacuous && !c.vacuous;
  return {exact && rounded && vacuous, "delta " + fmt(c.delta) + ", epsilon " + fmt(c.epsilon) + ", beta=1 vacuous " +
                                           (vacuous ? "yes" : "no")};
}

// AC11 -----------------------------------------------------------------------
Outcome determinism() {
  std::size_t files = 0;
  std::vector<std::string> mismatched;
  for (const auto& name : preset_names()) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      auto cfg = preset(name);
      const auto dir = scratch_root() / ("ac11_" + name + "_" + std::to_string(rep));
      fs::remove_all(dir);
      cfg.output_dir = dir.string();
      const auto r = run_experiment(cfg, RunOptions{rep == 0 ? 1u : 2u});
      if (!r.ok()) return {false, name + " failed: " + r.errors.front()};
      dirs.push_back(dir);
    }
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (e.path().extension() != ".csv") continue;
      const auto rel = fs::relative(e.path(), dirs[0]);
      ++files;
      if (slurp(e.path()) != slurp(dirs[1] / rel)) mismatched.push_back(name + "/" + rel.string());
    }
    for (const auto& d : dirs) fs::remove_all(d);
  }
  return {mismatched.empty() && files > 0, std::to_string(files) + " CSV files compared across 7 presets, " +
                                               std::to_string(mismatched.size()) + " differ"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1 oracle equivalence", 60, oracle_equivalence},
      {"AC2 gradient fidelity", 60, gradient_fidelity},
      {"AC3 likelihood test vs one-norm bound", 60, likelihood_test},
      {"AC4 parity test exactness", 60, parity_exactness},
      {"AC5 concentration scaling", 120, concentration_scaling},
      {"AC6 random-walk reproduction", 600, random_walk},
      {"AC7 qualitative loss ordering", 1800, qualitative_reproduction},
      {"AC8 QNG equals GD at 4 eta", 60, qng_equivalence},
      {"AC9 RPS factor", 60, rps_factor},
      {"AC10 certificate values", 1, certificate},
      {"AC11 preset determinism", 1e9, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS " : "FAIL ") << c.id << " [" << fmt(s) << " s" << (in_time ? "" : ", over time limit")
              << "]: " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
