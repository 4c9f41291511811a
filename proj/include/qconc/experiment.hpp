#ifndef QCONC_EXPERIMENT_HPP
#define QCONC_EXPERIMENT_HPP

// Experiment runner: executes every cell of a configuration, writes CSV and
// JSON artifacts and assembles the run record.

#include <qconc/config.hpp>
#include <qconc/diagnostics.hpp>
#include <qconc/hypotest.hpp>
#include <qconc/optimizers.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#ifndef QCONC_VERSION
#define QCONC_VERSION "unknown"
#endif

namespace qconc {

inline constexpr const char* kTrajectoryCsvVersion = "# qconc-trajectory-csv v1";
inline constexpr const char* kLossCurveCsvVersion = "# qconc-loss-curve-csv v1";
inline constexpr const char* kRandomWalkCsvVersion = "# qconc-random-walk-csv v1";
inline constexpr const char* kPcaCsvVersion = "# qconc-pca-csv v1";
inline constexpr const char* kTableCsvVersion = "# qconc-table-csv v1";

/// Shortest round-trip decimal form of a double, locale independent.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

/// Collects CSV text row by row.
class CsvBuilder {
 public:
  CsvBuilder(const char* version, const std::vector<std::string>& header) {
    text_ += version;
    text_ += '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

inline std::string num(double v) { return format_number(v); }
inline std::string num(std::uint64_t v) { return std::to_string(v); }

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Linear-interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Runs job(i) for i in [0, count) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t count, std::size_t workers, Job&& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Trajectory CSV: step, theta_0..theta_{n-1}, loss_estimate, update_norm.
/// update_norm at step t is |theta_t - theta_{t-1}|, 0 at step 0.
inline std::string trajectory_csv(const TrainingTrajectory& t) {
  const std::size_t n = t.config.num_qubits;
  std::vector<std::string> header{"step"};
  for (std::size_t k = 0; k < n; ++k) header.push_back("theta_" + std::to_string(k));
  header.push_back("loss_estimate");
  header.push_back("update_norm");
  detail::CsvBuilder csv(kTrajectoryCsvVersion, header);
  for (std::size_t s = 0; s < t.thetas.size(); ++s) {
    std::vector<std::string> row{std::to_string(s)};
    for (std::size_t k = 0; k < n; ++k) row.push_back(detail::num(t.thetas[s][k]));
    row.push_back(detail::num(t.loss_estimates[s]));
    double norm = 0.0;
    if (s > 0) {
      for (double d : t.updates[s - 1]) norm += d * d;
    }
    row.push_back(detail::num(std::sqrt(norm)));
    csv.row(row);
  }
  return csv.text();
}

struct RunOptions {
  std::size_t workers = 1;
};

/// One (system size, shot regime) cell of a training experiment.
struct TrainingCell {
  std::size_t num_qubits = 0;
  ShotToken shots = ShotToken::infinite();
  OptimizerConfig config;
  std::string directory;  // relative to the output directory
  std::vector<TrainingTrajectory> trajectories;
  std::vector<std::vector<double>> exact_losses;  // [trajectory][step]
};

struct RunResult {
  ExperimentConfig config;
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative paths of every artifact written
  std::vector<std::string> errors;
  std::vector<TrainingCell> cells;
  nlohmann::ordered_json diagnostics;

  bool ok() const noexcept { return errors.empty(); }
};

namespace detail {

inline std::string cell_directory(Method m, std::size_t n, const ShotToken& s) {
  return std::string("cells/") + to_string(m) + "_n" + std::to_string(n) + "_shots_" + s.label();
}

inline nlohmann::ordered_json random_walk_json(const RandomWalkReport& r) {
  return {{"ensemble_size", r.ensemble_size},
          {"steps", r.steps},
          {"predicted_variance", r.predicted_variance},
          {"mean_step_variance",
           r.step_variance.empty() ? 0.0
                                   : std::accumulate(r.step_variance.begin(), r.step_variance.end(), 0.0) /
                                         static_cast<double>(r.step_variance.size())},
          {"grand_mean", r.grand_mean},
          {"grand_mean_standard_error", r.grand_mean_standard_error},
          {"steps_mean_beyond_3se", r.steps_mean_beyond_3se},
          {"cumulative_slope", r.cumulative_slope},
          {"cumulative_intercept", r.cumulative_intercept},
          {"cumulative_r_squared", r.cumulative_r_squared}};
}

inline std::string random_walk_csv(const RandomWalkReport& r) {
  CsvBuilder csv(kRandomWalkCsvVersion, {"step", "update_mean", "update_mean_se", "update_variance",
                                          "predicted_variance", "cumulative_variance"});
  csv.row({"0", "", "", "", num(r.predicted_variance), num(r.cumulative_variance.at(0))});
  for (std::size_t t = 0; t < r.steps; ++t) {
    csv.row({std::to_string(t + 1), num(r.step_mean[t]), num(r.step_mean_standard_error[t]),
             num(r.step_variance[t]), num(r.predicted_variance), num(r.cumulative_variance[t + 1])});
  }
  return csv.text();
}

inline void run_training_experiment(RunResult& out, const RunOptions& options) {
  const auto& settings = out.config.training;
  const std::uint64_t seed = out.config.seed;
  for (std::size_t n : settings.system_sizes) {
    for (const auto& shot : settings.shots) {
      TrainingCell cell;
      cell.num_qubits = n;
      cell.shots = shot;
      cell.config = settings.optimizer(n, shot);
      cell.config.validate();
      cell.directory = cell_directory(settings.method, n, shot);
      cell.trajectories.resize(settings.ensemble);
      cell.exact_losses.resize(settings.ensemble);
      out.cells.push_back(std::move(cell));
    }
  }

  // Trajectory ids are shared across cells so every shot regime starts from
  // the same initial points.
  const std::size_t per_cell = settings.ensemble;
  parallel_for(out.cells.size() * per_cell, options.workers, [&](std::size_t job) {
    auto& cell = out.cells[job / per_cell];
    const std::size_t id = job % per_cell;
    auto traj = run_training(cell.config, seed, id);
    const auto evaluator = cell.config.evaluator();
    std::vector<double> exact;
    exact.reserve(traj.thetas.size());
    for (const auto& th : traj.thetas) exact.push_back(evaluator.exact(th));
    char name[32];
    std::snprintf(name, sizeof name, "traj_%04zu.csv", id);
    write_text(out.output_dir / cell.directory / name, trajectory_csv(traj));
    cell.exact_losses[id] = std::move(exact);
    cell.trajectories[id] = std::move(traj);
  });

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (auto& cell : out.cells) {
    nlohmann::ordered_json cj;
    cj["num_qubits"] = cell.num_qubits;
    cj["shots"] = cell.shots.to_json();
    cj["shots_resolved"] = cell.config.shots.is_infinite() ? nlohmann::ordered_json("infinite")
                                                           : nlohmann::ordered_json(cell.config.shots.shots());
    cj["directory"] = cell.directory;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < cell.trajectories.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "traj_%04zu.csv", i);
      out.files.push_back(cell.directory + "/" + name);
      if (cell.trajectories[i].error) {
        ++failed;
        out.errors.push_back(cell.directory + "/" + name + ": " + *cell.trajectories[i].error);
      }
    }
    cj["failed_trajectories"] = failed;
    const auto warnings = cell.config.evaluator().warnings();
    cj["warnings"] = warnings;

    // Loss curve over steps recorded by every trajectory.
    std::size_t rows = settings.steps + 1;
    for (const auto& t : cell.trajectories) rows = std::min(rows, t.thetas.size());
    CsvBuilder curve(kLossCurveCsvVersion, {"step", "median_loss_estimate", "mean_loss_estimate",
                                            "p25_loss_estimate", "p75_loss_estimate", "median_exact_loss"});
    for (std::size_t s = 0; s < rows; ++s) {
      std::vector<double> est;
      std::vector<double> exact;
      for (std::size_t i = 0; i < cell.trajectories.size(); ++i) {
        est.push_back(cell.trajectories[i].loss_estimates[s]);
        exact.push_back(cell.exact_losses[i][s]);
      }
      const double mean = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
      curve.row({std::to_string(s), num(median(est)), num(mean), num(quantile(est, 0.25)),
                 num(quantile(est, 0.75)), num(median(exact))});
    }
    write_text(out.output_dir / cell.directory / "loss_curve.csv", curve.text());
    out.files.push_back(cell.directory + "/loss_curve.csv");

    if (failed == 0 && rows > 0) {
      std::vector<double> first;
      std::vector<double> last;
      for (const auto& e : cell.exact_losses) {
        first.push_back(e.front());
        last.push_back(e.back());
      }
      cj["median_initial_exact_loss"] = median(first);
      cj["median_final_exact_loss"] = median(last);
    }

    if (settings.diagnostics.random_walk && failed == 0 && cell.trajectories.size() >= kMinRandomWalkEnsemble) {
      const auto report = random_walk_statistics(cell.trajectories, cell.config);
      cj["random_walk"] = random_walk_json(report);
      write_text(out.output_dir / cell.directory / "random_walk.csv", random_walk_csv(report));
      out.files.push_back(cell.directory + "/random_walk.csv");
    }
    cells.push_back(std::move(cj));
  }
  out.diagnostics["cells"] = std::move(cells);

  if (settings.diagnostics.pca) {
    nlohmann::ordered_json pcas = nlohmann::ordered_json::array();
    for (std::size_t n : settings.system_sizes) {
      // Trajectory 0 of every shot regime at this size, overlaid on one plane.
      std::vector<std::vector<Angles>> paths;
      std::vector<std::string> labels;
      for (const auto& cell : out.cells) {
        if (cell.num_qubits != n || cell.trajectories.empty() || cell.trajectories[0].error) continue;
        paths.push_back(cell.trajectories[0].thetas);
        labels.push_back(cell.shots.label());
      }
      if (paths.empty()) continue;
      const auto obs_config = settings.optimizer(n, ShotToken::infinite());
      const auto evaluator = obs_config.evaluator();
      const auto pca = pca_project(paths, settings.diagnostics.pca_resolution,
                                   [&](const Angles& a) { return evaluator.exact(a); });
      const std::string grid_name = "pca/grid_n" + std::to_string(n) + ".csv";
      const std::string path_name = "pca/paths_n" + std::to_string(n) + ".csv";
      CsvBuilder grid(kPcaCsvVersion, {"x", "y", "loss"});
      for (std::size_t iy = 0; iy < pca.grid_y.size(); ++iy) {
        for (std::size_t ix = 0; ix < pca.grid_x.size(); ++ix) {
          grid.row({num(pca.grid_x[ix]), num(pca.grid_y[iy]), num(pca.grid_loss[iy][ix])});
        }
      }
      CsvBuilder pathcsv(kPcaCsvVersion, {"regime", "step", "x", "y"});
      for (std::size_t p = 0; p < pca.projected.size(); ++p) {
        for (std::size_t s = 0; s < pca.projected[p].size(); ++s) {
          pathcsv.row({labels[p], std::to_string(s), num(pca.projected[p][s].first), num(pca.projected[p][s].second)});
        }
      }
      write_text(out.output_dir / grid_name, grid.text());
      write_text(out.output_dir / path_name, pathcsv.text());
      out.files.push_back(grid_name);
      out.files.push_back(path_name);
      pcas.push_back({{"num_qubits", n},
                      {"regimes", labels},
                      {"eigenvalues", {pca.eigenvalue1, pca.eigenvalue2}},
                      {"rank_deficient", pca.rank_deficient},
                      {"max_residual", pca.max_residual},
                      {"anchor", pca.anchor},
                      {"direction1", pca.direction1},
                      {"direction2", pca.direction2},
                      {"grid", grid_name},
                      {"paths", path_name}});
    }
    out.diagnostics["pca"] = std::move(pcas);
  }
}

inline void run_hypotest_experiment(RunResult& out) {
  const auto& h = out.config.hypotest;
  const std::uint64_t seed = out.config.seed;
  nlohmann::ordered_json diag;

  CsvBuilder certs(kTableCsvVersion, {"beta", "cardinality", "shots", "delta", "epsilon", "vacuous"});
  nlohmann::ordered_json cj = nlohmann::ordered_json::array();
  for (const auto& r : h.certificates) {
    const auto c = indistinguishability_certificate(r.beta, r.cardinality, r.shots);
    certs.row({num(c.beta), num(c.cardinality), num(c.shots), num(c.delta), num(c.epsilon),
               c.vacuous ? "true" : "false"});
    cj.push_back({{"beta", c.beta}, {"cardinality", c.cardinality}, {"shots", c.shots},
                  {"delta", c.delta}, {"epsilon", c.epsilon}, {"vacuous", c.vacuous}});
  }
  write_text(out.output_dir / "certificates.csv", certs.text());
  out.files.push_back("certificates.csv");
  diag["certificates"] = std::move(cj);

  CsvBuilder parity(kTableCsvVersion, {"shots", "analytic_error", "trials", "empirical_error", "standard_error"});
  for (std::size_t i = 0; i < h.parity_shots.size(); ++i) {
    RngStream rng(seed, hash64({seed, 0x70617269ULL, i}));
    const auto r = simulate_parity_test(h.parity_support, h.parity_shots[i], h.parity_trials, rng);
    parity.row({num(h.parity_shots[i]), num(r.bound), num(r.trials), num(r.rate), num(r.standard_error())});
  }
  write_text(out.output_dir / "parity_test.csv", parity.text());
  out.files.push_back("parity_test.csv");

  // Pair 0 is the textbook (0.75, 0.25) vs (0.25, 0.75); the rest are random
  // distributions on a small support, each tested with a single sample.
  CsvBuilder lik(kTableCsvVersion, {"pair", "support", "shots", "one_norm", "optimal_success", "bound",
                                    "trials", "success_rate", "standard_error"});
  std::size_t above = 0;
  for (std::size_t i = 0; i <= h.random_pairs; ++i) {
    RngStream rng(seed, hash64({seed, 0x6c696b65ULL, i}));
    DiscreteDistribution p = DiscreteDistribution::explicit_probabilities({0.75, 0.25});
    DiscreteDistribution q = DiscreteDistribution::explicit_probabilities({0.25, 0.75});
    if (i > 0) {
      auto draw = [&] {
        std::vector<double> v(h.random_pair_support);
        double s = 0.0;
        for (double& x : v) s += (x = -std::log(1.0 - rng.uniform01()));
        for (double& x : v) x /= s;
        return DiscreteDistribution::explicit_probabilities(std::move(v));
      };
      p = draw();
      q = draw();
    }
    const auto r = simulate_hypothesis_test(p, q, 1, h.likelihood_trials, rng);
    if (r.rate > r.bound + 3.0 * r.standard_error()) ++above;
    lik.row({std::to_string(i), num(p.support_size()), "1", num(one_norm(p, q)),
             num(optimal_success_probability(p, q)), num(r.bound), num(r.trials), num(r.rate),
             num(r.standard_error())});
  }
  write_text(out.output_dir / "likelihood_test.csv", lik.text());
  out.files.push_back("likelihood_test.csv");
  diag["likelihood_pairs_above_bound_3se"] = above;

  CsvBuilder fam(kTableCsvVersion, {"family", "support", "shots", "one_norm", "success_bound"});
  for (const char* name : {"counterexample", "indistinguishable"}) {
    const auto pair = std::string_view(name) == "counterexample" ? counterexample_family(h.family_support)
                                                                 : indistinguishable_family(h.family_support);
    const double norm = one_norm(pair.parameterised, pair.fixed);
    for (auto n : h.family_shots) {
      fam.row({name, num(h.family_support), num(n), num(norm),
               num(many_sample_success_bound(pair.parameterised, pair.fixed, n))});
    }
  }
  write_text(out.output_dir / "family_bounds.csv", fam.text());
  out.files.push_back("family_bounds.csv");
  out.diagnostics["hypotest"] = std::move(diag);
}

inline PovmSpec concentration_povm(ConcentrationPovm kind, std::size_t n, RotationConvention conv,
                                   std::uint64_t seed) {
  switch (kind) {
    case ConcentrationPovm::global_z:
      return pauli_term_povm(PauliZTerm{1.0, Observable::prefix_mask(n)}, conv);
    case ConcentrationPovm::cvar_eigen: {
      const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
      return cvar_eigenvalue_povm_spec(c, conv, nullptr);
    }
    case ConcentrationPovm::fidelity_kernel: {
      // Fixed reference point x'; alpha = x is drawn per sample.
      RngStream rng(seed, hash64({seed, 0x6b65726eULL, n}));
      return fidelity_kernel_povm(uniform_angle_sampler(n)(rng), conv);
    }
  }
  throw InvalidInput("unknown POVM");
}

inline void run_concentration_experiment(RunResult& out, const RunOptions& options) {
  const auto& s = out.config.concentration;
  const std::uint64_t seed = out.config.seed;
  VarianceMode mode = ExactProbabilities{};
  if (s.shots.kind() == ShotToken::Kind::fixed) mode = ShotEstimated{s.shots.value()};

  struct Job {
    ConcentrationPovm povm;
    std::size_t n;
    ConcentrationReport report;
  };
  std::vector<Job> jobs;
  for (auto p : s.povms) {
    for (auto n : s.system_sizes) jobs.push_back({p, n, {}});
  }
  parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
    auto& j = jobs[i];
    const auto povm = concentration_povm(j.povm, j.n, s.convention, seed);
    j.report = estimate_outcome_variance(povm, uniform_angle_sampler(j.n), s.draws, mode,
                                         hash64({seed, static_cast<std::uint64_t>(j.povm), j.n}));
  });

  CsvBuilder csv(kTableCsvVersion, {"povm", "num_qubits", "cardinality", "draws", "mode", "beta_hat",
                                    "beta_hat_standard_error", "worst_outcome"});
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  std::vector<QuantityEvidence> evidence;
  for (auto p : s.povms) {
    std::vector<std::pair<double, double>> table;
    std::size_t cardinality = 0;
    for (const auto& j : jobs) {
      if (j.povm != p) continue;
      csv.row({to_string(p), std::to_string(j.n), std::to_string(j.report.cardinality),
               std::to_string(j.report.draws), j.report.mode, num(j.report.beta_hat),
               num(j.report.beta_hat_standard_error), std::to_string(j.report.worst_outcome)});
      table.emplace_back(static_cast<double>(j.n), j.report.beta_hat);
      cardinality = std::max(cardinality, j.report.cardinality);
    }
    QuantityEvidence ev;
    ev.quantity = std::string("outcome probabilities of ") + to_string(p);
    ev.povm = to_string(p);
    ev.cardinality = cardinality;
    // All three families have a bounded number of outcomes.
    ev.growth = CardinalityGrowth::polynomial;
    nlohmann::ordered_json fj{{"povm", to_string(p)}};
    if (table.size() >= 3) {
      const auto fit = concentration_scaling_fit(table);
      ev.scaling = fit;
      fj["slope"] = fit.slope;
      fj["intercept"] = fit.intercept;
      fj["residual_rms"] = fit.residual_rms;
      fj["classification"] = to_string(fit.classification);
    } else {
      fj["classification"] = "insufficient sizes";
    }
    const auto verdict = guideline_check({ev});
    fj["guideline_verdict"] = to_string(verdict.overall);
    fits.push_back(std::move(fj));
    evidence.push_back(std::move(ev));
  }
  // A computational-basis readout has 2^n outcomes and is outside the scope
  // of the guideline regardless of the data.
  QuantityEvidence basis;
  basis.quantity = "computational-basis distribution";
  basis.povm = "computational_basis";
  basis.growth = CardinalityGrowth::super_polynomial;
  const auto basis_verdict = guideline_check({basis});

  write_text(out.output_dir / "concentration.csv", csv.text());
  out.files.push_back("concentration.csv");
  out.diagnostics["concentration"] = {
      {"estimator", "sample variance of each outcome probability over uniform parameter draws; "
                    "beta_hat is the largest over outcomes"},
      {"fits", std::move(fits)},
      {"computational_basis_verdict", to_string(basis_verdict.overall)}};
}

}  // namespace detail

/// Executes a configuration and writes every artifact below output_dir.
/// Artifacts written before a failure are kept; failures are listed in
/// RunResult::errors and in run_record.json.
inline RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  out.config = config;
  out.output_dir = config.resolved_output_dir();
  out.config.output_dir = out.output_dir.string();
  std::filesystem::create_directories(out.output_dir);

  const std::string snapshot = normalized_config_text(out.config);
  detail::write_text(out.output_dir / "config.json", snapshot);
  out.files.push_back("config.json");
  out.diagnostics["kind"] = to_string(config.kind);

  try {
    switch (config.kind) {
      case ExperimentKind::training: detail::run_training_experiment(out, options); break;
      case ExperimentKind::hypotest: detail::run_hypotest_experiment(out); break;
      case ExperimentKind::concentration: detail::run_concentration_experiment(out, options); break;
    }
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
  }

  detail::write_text(out.output_dir / "diagnostics.json", out.diagnostics.dump(2) + "\n");
  out.files.push_back("diagnostics.json");

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json record;
  record["tool"] = "qconc";
  record["version"] = QCONC_VERSION;
  record["status"] = out.ok() ? "ok" : "failed";
  record["config"] = nlohmann::ordered_json::parse(snapshot);
  record["config_file"] = "config.json";
  record["diagnostics_file"] = "diagnostics.json";
  record["files"] = out.files;
  record["errors"] = out.errors;
  record["plots"] = nlohmann::ordered_json::array();
  record["wall_clock"] = {{"started_utc", detail::utc_timestamp(started)},
                          {"elapsed_seconds", elapsed},
                          {"workers", options.workers}};
  detail::write_text(out.output_dir / "run_record.json", record.dump(2) + "\n");
  return out;
}

}  // namespace qconc

#endif  // QCONC_EXPERIMENT_HPP
