#ifndef QCONC_DIAGNOSTICS_HPP
#define QCONC_DIAGNOSTICS_HPP

// Concentration measurement, the three-step guideline checker, random-walk
// statistics of training ensembles, and PCA projection of trajectories.

#include <qconc/circuitsim.hpp>
#include <qconc/error.hpp>
#include <qconc/measurement.hpp>
#include <qconc/optimizers.hpp>
#include <qconc/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace qconc {

// ---------------------------------------------------------------------------
// Outcome-probability concentration
// ---------------------------------------------------------------------------

using AlphaSampler = std::function<Angles(RngStream&)>;

/// Each parameter uniform in [0, 2 pi).
inline AlphaSampler uniform_angle_sampler(std::size_t n) {
  return [n](RngStream& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * std::numbers::pi * rng.uniform01();
    return Angles(std::move(v));
  };
}

struct ExactProbabilities {};
struct ShotEstimated {
  std::uint64_t shots = 1000;
};
using VarianceMode = std::variant<ExactProbabilities, ShotEstimated>;

/// Mean and variance of every outcome probability over R parameter draws.
/// beta_hat is the largest per-outcome variance.
struct ConcentrationReport {
  std::string povm;
  std::size_t cardinality = 0;
  std::size_t draws = 0;
  std::string mode;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> variance_standard_errors;
  double beta_hat = 0.0;
  double beta_hat_standard_error = 0.0;
  std::size_t worst_outcome = 0;
};

namespace detail {

struct MomentAccumulator {
  std::vector<double> values;

  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }

  /// Unbiased sample variance and the standard error of that estimate,
  /// sqrt((m4 - s^4) / R).
  std::pair<double, double> variance_with_error() const {
    const double m = mean();
    const double r = static_cast<double>(values.size());
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : values) {
      const double d = v - m;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (r - 1.0);
    const double pop = m2 / r;
    const double se = std::sqrt(std::max(0.0, m4 / r - pop * pop) / r);
    return {var, se};
  }
};

}  // namespace detail

/// R independent parameter draws from the sampler; each draw gets its own
/// stream derived from (seed, draw index).
///
/// In shot mode every probability is replaced by its N-shot frequency and the
/// variance estimate is corrected by subtracting the mean of
/// p_hat (1 - p_hat) / (N - 1), the expected binomial noise contribution.
inline ConcentrationReport estimate_outcome_variance(const PovmSpec& povm, const AlphaSampler& sampler,
                                                     std::size_t draws, const VarianceMode& mode,
                                                     std::uint64_t seed) {
  detail::require(draws >= 2, "outcome variance: at least two parameter draws required");
  const std::size_t m = povm.cardinality();
  const auto* shot_mode = std::get_if<ShotEstimated>(&mode);
  if (shot_mode != nullptr) {
    detail::require(shot_mode->shots >= 2, "outcome variance: shot mode needs N >= 2");
  }
  std::vector<detail::MomentAccumulator> acc(m);
  std::vector<double> noise(m, 0.0);
  for (std::size_t r = 0; r < draws; ++r) {
    RngStream rng(seed, hash64({seed, r, 0x616c706861ULL}));
    const Angles alpha = sampler(rng);
    auto dist = povm.distribution(alpha);
    if (shot_mode != nullptr) {
      const auto counts = sample(dist, shot_mode->shots, rng);
      dist = empirical_distribution(counts);
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double p = dist.probability(k);
      acc[k].values.push_back(p);
      if (shot_mode != nullptr) {
        noise[k] += p * (1.0 - p) / static_cast<double>(shot_mode->shots - 1);
      }
    }
  }
  ConcentrationReport report;
  report.povm = povm.name();
  report.cardinality = m;
  report.draws = draws;
  report.mode = shot_mode != nullptr ? "shot_estimated(" + std::to_string(shot_mode->shots) + ")"
                                     : "exact_probabilities";
  for (std::size_t k = 0; k < m; ++k) {
    auto [var, se] = acc[k].variance_with_error();
    if (shot_mode != nullptr) var -= noise[k] / static_cast<double>(draws);
    report.means.push_back(acc[k].mean());
    report.variances.push_back(std::max(0.0, var));
    report.variance_standard_errors.push_back(se);
  }
  const auto worst = std::max_element(report.variances.begin(), report.variances.end());
  report.worst_outcome = static_cast<std::size_t>(worst - report.variances.begin());
  report.beta_hat = *worst;
  report.beta_hat_standard_error = report.variance_standard_errors[report.worst_outcome];
  return report;
}

enum class ScalingClass { exponential, not_exponential, inconclusive };

inline const char* to_string(ScalingClass c) {
  switch (c) {
    case ScalingClass::exponential: return "exponential";
    case ScalingClass::not_exponential: return "not_exponential";
    case ScalingClass::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Least-squares fit of log2(beta_hat) against n.
struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
  ScalingClass classification = ScalingClass::inconclusive;
};

inline constexpr double kExponentialSlopeThreshold = -0.5;
inline constexpr double kScalingResidualThreshold = 0.5;  // log2 units

inline ScalingFit concentration_scaling_fit(const std::vector<std::pair<double, double>>& table) {
  detail::require(table.size() >= 3, "scaling fit: at least three system sizes required");
  ScalingFit fit;
  fit.points = table.size();
  for (const auto& [n, beta] : table) {
    if (!(beta > 0.0) || !std::isfinite(beta)) return fit;  // inconclusive
  }
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [n, beta] : table) {
    sx += n;
    sy += std::log2(beta);
  }
  const double k = static_cast<double>(table.size());
  const double mx = sx / k;
  const double my = sy / k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [n, beta] : table) {
    sxx += (n - mx) * (n - mx);
    sxy += (n - mx) * (std::log2(beta) - my);
  }
  detail::require(sxx > 0.0, "scaling fit: system sizes must differ");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [n, beta] : table) {
    const double r = std::log2(beta) - (fit.intercept + fit.slope * n);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / k);
  if (fit.residual_rms > kScalingResidualThreshold) {
    fit.classification = ScalingClass::inconclusive;
  } else if (fit.slope <= kExponentialSlopeThreshold) {
    fit.classification = ScalingClass::exponential;
  } else {
    fit.classification = ScalingClass::not_exponential;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Guideline checker
// ---------------------------------------------------------------------------

/// How |M| grows with the number of qubits, declared for the POVM family.
enum class CardinalityGrowth { polynomial, super_polynomial, unknown };

struct QuantityEvidence {
  std::string quantity;
  std::string povm;
  std::size_t cardinality = 0;
  CardinalityGrowth growth = CardinalityGrowth::unknown;
  std::optional<ScalingFit> scaling;
};

enum class Verdict { concentration_limited, not_concentration_limited, outside_scope, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::concentration_limited: return "concentration-limited";
    case Verdict::not_concentration_limited: return "not concentration-limited";
    case Verdict::outside_scope: return "outside guideline scope";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct QuantityFinding {
  std::string quantity;
  std::string povm;
  std::size_t cardinality = 0;
  bool polynomial_cardinality = false;
  Verdict cardinality_step = Verdict::inconclusive;
  ScalingClass concentration = ScalingClass::inconclusive;
  std::string note;
};

struct GuidelineVerdict {
  std::vector<std::string> inventory;
  std::vector<QuantityFinding> findings;
  Verdict overall = Verdict::inconclusive;
};

/// Step 1 lists the measured quantities, step 2 checks that every POVM has
/// polynomially many outcomes, step 3 classifies how the outcome
/// probabilities concentrate. The procedure is concentration-limited only
/// when every POVM passes step 2 and concentrates exponentially in step 3.
inline GuidelineVerdict guideline_check(const std::vector<QuantityEvidence>& procedure) {
  GuidelineVerdict v;
  bool any_outside = false;
  bool any_unknown = procedure.empty();
  bool any_informative = false;
  for (const auto& q : procedure) {
    v.inventory.push_back(q.quantity);
    QuantityFinding f;
    f.quantity = q.quantity;
    f.povm = q.povm;
    f.cardinality = q.cardinality;
    switch (q.growth) {
      case CardinalityGrowth::polynomial:
        f.polynomial_cardinality = true;
        f.cardinality_step = Verdict::concentration_limited;
        break;
      case CardinalityGrowth::super_polynomial:
        f.cardinality_step = Verdict::outside_scope;
        f.note = "POVM has super-polynomially many outcomes";
        any_outside = true;
        break;
      case CardinalityGrowth::unknown:
        f.note = "cardinality growth not declared";
        any_unknown = true;
        break;
    }
    if (q.scaling) {
      f.concentration = q.scaling->classification;
      if (f.concentration == ScalingClass::not_exponential) any_informative = true;
      if (f.concentration == ScalingClass::inconclusive) any_unknown = true;
    } else {
      f.concentration = ScalingClass::inconclusive;
      if (f.note.empty()) f.note = "no concentration evidence";
      any_unknown = true;
    }
    v.findings.push_back(std::move(f));
  }
  if (any_outside) {
    v.overall = Verdict::outside_scope;
  } else if (any_informative) {
    v.overall = Verdict::not_concentration_limited;
  } else if (any_unknown) {
    v.overall = Verdict::inconclusive;
  } else {
    v.overall = Verdict::concentration_limited;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Random-walk statistics
// ---------------------------------------------------------------------------

/// Step size multiplying the raw parameter-shift gradient for methods whose
/// update is a rescaled gradient step.
inline double effective_learning_rate(const OptimizerConfig& config) {
  const double eta = config.learning_rate;
  switch (config.method) {
    case Method::qng:
      if (config.qgt.mode == QgtMode::analytic) {
        return eta / (config.convention == RotationConvention::half_angle ? 0.25 : 1.0);
      }
      return eta;
    case Method::rps:
      if (config.shots.is_infinite()) return eta;
      return eta * rps_lambda(std::ldexp(1.0, static_cast<int>(config.num_qubits)),
                              static_cast<double>(config.shots.shots()));
    default:
      return eta;
  }
}

/// Variance of one update component when every loss estimate is an average of
/// fair +-1 coins: (eta_eff kappa)^2 sum_i c_i^2 (2 / N). With kappa = 1/2
/// this is eta^2 sum_i c_i^2 / (2N). Zero for infinite shots.
inline double coin_model_variance(const OptimizerConfig& config) {
  if (config.shots.is_infinite()) return 0.0;
  const double rate = effective_learning_rate(config) * config.resolved_shift_rule().scale;
  const double c2 = config.evaluator().observable().squared_coefficient_sum();
  return rate * rate * c2 * 2.0 / static_cast<double>(config.shots.shots());
}

struct RandomWalkReport {
  std::size_t ensemble_size = 0;
  std::size_t steps = 0;
  std::size_t components = 0;
  double predicted_variance = 0.0;
  std::vector<double> step_mean;            // pooled over trajectories and components
  std::vector<double> step_mean_standard_error;
  std::vector<double> step_variance;        // unbiased, pooled
  std::vector<double> cumulative_variance;  // variance of theta_t - theta_0, t = 0..steps
  double cumulative_slope = 0.0;
  double cumulative_intercept = 0.0;
  double cumulative_r_squared = 0.0;
  double grand_mean = 0.0;
  double grand_mean_standard_error = 0.0;
  std::size_t steps_mean_beyond_3se = 0;
};

namespace detail {

inline bool same_configuration(const OptimizerConfig& a, const OptimizerConfig& b) {
  return a.method == b.method && a.num_qubits == b.num_qubits &&
         a.learning_rate == b.learning_rate && a.steps == b.steps && a.shots == b.shots &&
         a.convention == b.convention && a.gamma == b.gamma &&
         a.resolved_shift_rule().shift == b.resolved_shift_rule().shift &&
         a.resolved_shift_rule().scale == b.resolved_shift_rule().scale &&
         a.cvar_coefficients == b.cvar_coefficients && a.qgt.mode == b.qgt.mode;
}

/// Least squares y = a + b x; returns (a, b, R^2).
inline std::tuple<double, double, double> linear_fit(const std::vector<double>& x,
                                                     const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double b = sxx > 0.0 ? sxy / sxx : 0.0;
  const double r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return {my - b * mx, b, r2};
}

}  // namespace detail

inline constexpr std::size_t kMinRandomWalkEnsemble = 30;

/// Per-step ensemble statistics of the update vectors and the growth of the
/// displacement variance, compared against the coin model of the update.
inline RandomWalkReport random_walk_statistics(const std::vector<TrainingTrajectory>& ensemble,
                                               const OptimizerConfig& config) {
  detail::require(ensemble.size() >= kMinRandomWalkEnsemble,
                  "random walk: at least 30 trajectories required");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ids;
  for (const auto& t : ensemble) {
    detail::require(detail::same_configuration(t.config, config), "random walk: mixed configurations");
    detail::require(!t.error && t.steps() == config.steps, "random walk: incomplete trajectory");
    ids.emplace_back(t.master_seed, t.trajectory_id);
  }
  std::sort(ids.begin(), ids.end());
  detail::require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(),
                  "random walk: trajectories must have distinct seeds");

  RandomWalkReport r;
  r.ensemble_size = ensemble.size();
  r.steps = config.steps;
  r.components = config.num_qubits;
  r.predicted_variance = coin_model_variance(config);
  const double count = static_cast<double>(ensemble.size() * config.num_qubits);
  double grand = 0.0;
  double grand_var = 0.0;
  for (std::size_t t = 0; t < config.steps; ++t) {
    double s = 0.0;
    for (const auto& traj : ensemble) {
      for (double d : traj.updates[t]) s += d;
    }
    const double mean = s / count;
    double ss = 0.0;
    for (const auto& traj : ensemble) {
      for (double d : traj.updates[t]) ss += (d - mean) * (d - mean);
    }
    const double var = ss / (count - 1.0);
    const double se = std::sqrt(var / count);
    r.step_mean.push_back(mean);
    r.step_variance.push_back(var);
    r.step_mean_standard_error.push_back(se);
    if (std::abs(mean) > 3.0 * se) ++r.steps_mean_beyond_3se;
    grand += mean;
    grand_var += var / count;
  }
  if (config.steps > 0) {
    const double steps = static_cast<double>(config.steps);
    r.grand_mean = grand / steps;
    r.grand_mean_standard_error = std::sqrt(grand_var) / steps;
  }
  std::vector<double> x;
  for (std::size_t t = 0; t <= config.steps; ++t) {
    double s = 0.0;
    double ss = 0.0;
    for (const auto& traj : ensemble) {
      for (std::size_t k = 0; k < config.num_qubits; ++k) {
        const double d = traj.thetas[t][k] - traj.thetas[0][k];
        s += d;
        ss += d * d;
      }
    }
    // Variance across the ensemble per component, averaged over components.
    double v = 0.0;
    for (std::size_t k = 0; k < config.num_qubits; ++k) {
      double sk = 0.0;
      double ssk = 0.0;
      for (const auto& traj : ensemble) {
        const double d = traj.thetas[t][k] - traj.thetas[0][k];
        sk += d;
        ssk += d * d;
      }
      const double e = static_cast<double>(ensemble.size());
      v += (ssk - sk * sk / e) / (e - 1.0);
    }
    r.cumulative_variance.push_back(v / static_cast<double>(config.num_qubits));
    x.push_back(static_cast<double>(t));
  }
  std::tie(r.cumulative_intercept, r.cumulative_slope, r.cumulative_r_squared) =
      detail::linear_fit(x, r.cumulative_variance);
  return r;
}

// ---------------------------------------------------------------------------
// PCA projection
// ---------------------------------------------------------------------------

struct PcaProjection {
  std::vector<double> anchor;
  std::vector<double> direction1;
  std::vector<double> direction2;
  double eigenvalue1 = 0.0;
  double eigenvalue2 = 0.0;
  bool rank_deficient = false;
  double max_residual = 0.0;  // largest distance of a pooled point from the plane
  std::vector<std::vector<std::pair<double, double>>> projected;  // per trajectory
  std::vector<double> grid_x;
  std::vector<double> grid_y;
  std::vector<std::vector<double>> grid_loss;  // [iy][ix]
};

namespace detail {

inline void fix_sign(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Top-2 principal directions of the pooled parameter records, the projection
/// of every trajectory on the plane through their mean, and the loss on a
/// resolution x resolution grid spanning the projections plus a 10% margin.
inline PcaProjection pca_project(const std::vector<std::vector<Angles>>& trajectories,
                                 std::size_t resolution,
                                 const std::function<double(const Angles&)>& loss) {
  detail::require(resolution >= 2, "pca: grid resolution must be at least 2");
  std::vector<const Angles*> points;
  for (const auto& traj : trajectories) {
    for (const auto& p : traj) points.push_back(&p);
  }
  detail::require(!points.empty(), "pca: no parameter records");
  const auto dim = static_cast<Eigen::Index>(points.front()->size());
  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd data(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    detail::require(static_cast<Eigen::Index>(points[static_cast<std::size_t>(i)]->size()) == dim,
                    "pca: parameter dimension mismatch");
    for (Eigen::Index j = 0; j < dim; ++j) data(i, j) = (*points[static_cast<std::size_t>(i)])[static_cast<std::size_t>(j)];
  }
  const Eigen::VectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  detail::require(centered.cwiseAbs().maxCoeff() > 0.0, "pca: need at least two distinct points");
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(rows - 1, 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd vectors = eig.eigenvectors();

  PcaProjection out;
  Eigen::VectorXd d1 = vectors.col(dim - 1);
  detail::fix_sign(d1);
  out.eigenvalue1 = values(dim - 1);
  Eigen::VectorXd d2;
  const double tol = 1e-12 * std::max(1.0, std::abs(out.eigenvalue1));
  if (dim >= 2 && values(dim - 2) > tol) {
    d2 = vectors.col(dim - 2);
    out.eigenvalue2 = values(dim - 2);
  } else {
    // Any unit vector orthogonal to d1: the axis least aligned with it.
    out.rank_deficient = true;
    out.eigenvalue2 = dim >= 2 ? std::max(0.0, values(dim - 2)) : 0.0;
    Eigen::Index axis = 0;
    d1.cwiseAbs().minCoeff(&axis);
    d2 = Eigen::VectorXd::Unit(dim, axis) - d1 * d1(axis);
    if (d2.norm() < 1e-12) d2 = Eigen::VectorXd::Zero(dim);
    else d2.normalize();
  }
  detail::fix_sign(d2);

  out.anchor.assign(mean.data(), mean.data() + dim);
  out.direction1.assign(d1.data(), d1.data() + dim);
  out.direction2.assign(d2.data(), d2.data() + dim);

  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto& traj : trajectories) {
    std::vector<std::pair<double, double>> proj;
    for (const auto& p : traj) {
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.values().data(), dim) - mean;
      const double a = d1.dot(x);
      const double b = d2.dot(x);
      out.max_residual = std::max(out.max_residual, (x - a * d1 - b * d2).norm());
      proj.emplace_back(a, b);
      if (first) {
        xmin = xmax = a;
        ymin = ymax = b;
        first = false;
      }
      xmin = std::min(xmin, a);
      xmax = std::max(xmax, a);
      ymin = std::min(ymin, b);
      ymax = std::max(ymax, b);
    }
    out.projected.push_back(std::move(proj));
  }
  auto widen = [](double& lo, double& hi) {
    const double span = std::max(hi - lo, 1e-6);
    lo -= 0.1 * span;
    hi += 0.1 * span;
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  const double denom = static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < resolution; ++i) {
    out.grid_x.push_back(xmin + (xmax - xmin) * static_cast<double>(i) / denom);
    out.grid_y.push_back(ymin + (ymax - ymin) * static_cast<double>(i) / denom);
  }
  for (double y : out.grid_y) {
    std::vector<double> row;
    for (double x : out.grid_x) {
      const Eigen::VectorXd p = mean + x * d1 + y * d2;
      row.push_back(loss(Angles(std::vector<double>(p.data(), p.data() + dim))));
    }
    out.grid_loss.push_back(std::move(row));
  }
  return out;
}

}  // namespace qconc

#endif  // QCONC_DIAGNOSTICS_HPP
