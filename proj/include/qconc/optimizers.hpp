#ifndef QCONC_OPTIMIZERS_HPP
#define QCONC_OPTIMIZERS_HPP

// Finite-shot training loops: gradient descent, quantum natural gradient,
// CVaR gradient descent, rescaled parameter shift, and a classical network
// that generates the circuit parameters. Every loss value entering an update
// is an estimate built from fresh multinomial samples unless the shot budget
// is infinite.

#include <qconc/circuitsim.hpp>
#include <qconc/error.hpp>
#include <qconc/estimators.hpp>
#include <qconc/measurement.hpp>
#include <qconc/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qconc {

/// Number of shots per estimate, or the infinite-shot limit (exact values).
class ShotBudget {
 public:
  static ShotBudget infinite() { return ShotBudget(); }
  static ShotBudget finite(std::uint64_t shots) {
    detail::require(shots >= 1, "shot budget: at least one shot required");
    return ShotBudget(shots);
  }

  bool is_infinite() const noexcept { return !shots_.has_value(); }
  std::uint64_t shots() const {
    detail::require(shots_.has_value(), "shot budget: infinite budget has no shot count");
    return *shots_;
  }

  bool operator==(const ShotBudget&) const = default;

 private:
  ShotBudget() = default;
  explicit ShotBudget(std::uint64_t n) : shots_(n) {}
  std::optional<std::uint64_t> shots_;
};

/// Evaluation ids used to derive independent streams inside one step.
namespace evaluation_id {
inline constexpr std::uint64_t loss_record = 0;
inline std::uint64_t shift_plus(std::size_t k) { return 2 * k + 1; }
inline std::uint64_t shift_minus(std::size_t k) { return 2 * k + 2; }
inline constexpr std::uint64_t metric = 1ULL << 40;
inline constexpr std::uint64_t initial_point = 1ULL << 41;
inline constexpr std::uint64_t network_init = 1ULL << 42;
}  // namespace evaluation_id

/// Derives the RNG stream for each evaluation in one optimisation step.
class StepStreams {
 public:
  StepStreams(std::uint64_t master_seed, std::uint64_t trajectory_id, std::uint64_t step)
      : master_(master_seed), trajectory_(trajectory_id), step_(step) {}

  RngStream stream(std::uint64_t evaluation) const {
    return RngStream::derive(master_, trajectory_, step_, evaluation);
  }

 private:
  std::uint64_t master_;
  std::uint64_t trajectory_;
  std::uint64_t step_;
};

/// Estimated loss at a parameter point. Empirical-mean evaluators measure each
/// Z-parity term with its own two-outcome POVM and combine the estimates
/// linearly; CVaR evaluators measure the four-term prefix Hamiltonian in its
/// eigenbasis and apply the CVaR map.
class LossEvaluator {
 public:
  static LossEvaluator mean(Observable obs, ShotBudget budget,
                            RotationConvention conv = RotationConvention::half_angle) {
    return LossEvaluator(std::move(obs), EmpiricalMean{}, budget, conv, {});
  }

  static LossEvaluator cvar(std::vector<double> coefficients, double gamma, ShotBudget budget,
                            std::size_t num_qubits,
                            RotationConvention conv = RotationConvention::half_angle) {
    detail::check_gamma(gamma);
    auto obs = Observable::cvar_hamiltonian(num_qubits, coefficients);
    return LossEvaluator(std::move(obs), Cvar{gamma}, budget, conv, std::move(coefficients));
  }

  const Observable& observable() const noexcept { return obs_; }
  const EstimatorKind& kind() const noexcept { return kind_; }
  const ShotBudget& budget() const noexcept { return budget_; }
  RotationConvention convention() const noexcept { return conv_; }
  bool is_cvar() const noexcept { return std::holds_alternative<Cvar>(kind_); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// The infinite-shot objective: Tr[H rho] for the mean map, the exact
  /// distribution CVaR for the CVaR map.
  double exact(const Angles& theta) const {
    if (const auto* c = std::get_if<Cvar>(&kind_)) {
      return cvar_exact(cvar_povm_->distribution(theta), c->gamma);
    }
    return loss_exact(theta, obs_, conv_);
  }

  double evaluate(const Angles& theta, RngStream& rng) const {
    if (budget_.is_infinite()) return exact(theta);
    const std::uint64_t n = budget_.shots();
    if (const auto* c = std::get_if<Cvar>(&kind_)) {
      return cvar_map(sample(cvar_povm_->distribution(theta), n, rng), c->gamma);
    }
    double acc = 0.0;
    for (const auto& term : obs_.terms()) {
      const double e = z_parity_expectation(theta, term.mask, conv_);
      const OutcomeDistribution dist({1.0, -1.0}, {0.5 * (1.0 + e), 0.5 * (1.0 - e)});
      acc += term.coefficient * mean_map(sample(dist, n, rng));
    }
    return acc;
  }

  LossEvaluator with_budget(ShotBudget budget) const {
    LossEvaluator copy = *this;
    copy.budget_ = budget;
    return copy;
  }

 private:
  LossEvaluator(Observable obs, EstimatorKind kind, ShotBudget budget, RotationConvention conv,
                std::vector<double> cvar_coefficients)
      : obs_(std::move(obs)), kind_(kind), budget_(budget), conv_(conv) {
    if (is_cvar()) {
      cvar_povm_.emplace(cvar_eigenvalue_povm_spec(cvar_coefficients, conv, &warnings_));
    }
  }

  Observable obs_;
  EstimatorKind kind_;
  ShotBudget budget_;
  RotationConvention conv_;
  std::optional<PovmSpec> cvar_povm_;
  std::vector<std::string> warnings_;
};

enum class Method { gd, qng, cvar_gd, rps, nn_init };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::gd: return "gd";
    case Method::qng: return "qng";
    case Method::cvar_gd: return "cvar_gd";
    case Method::rps: return "rps";
    case Method::nn_init: return "nn_init";
  }
  return "?";
}

enum class QgtMode { analytic, shot_estimated };

/// Shift s and prefactor kappa that make the parameter-shift rule exact for
/// the given gate convention: (pi/2, 1/2) for exp(-i theta X/2) and
/// (pi/4, 1) for exp(-i theta X).
struct ShiftRule {
  double shift;
  double scale;
};

inline ShiftRule default_shift_rule(RotationConvention conv) {
  return conv == RotationConvention::half_angle ? ShiftRule{std::numbers::pi / 2, 0.5}
                                                : ShiftRule{std::numbers::pi / 4, 1.0};
}

struct QgtSettings {
  QgtMode mode = QgtMode::analytic;
  double tolerance = 1e-8;
  double ridge = 0.0;
};

struct MlpSettings {
  std::size_t input_dim = 4;
  std::size_t hidden = 0;  // 0: max(8, n)
  double init_scale = 0.1;
};

struct OptimizerConfig {
  Method method = Method::gd;
  std::size_t num_qubits = 1;
  double learning_rate = 0.1;
  std::optional<ShiftRule> shift_rule;  // default: matched to the convention
  std::size_t steps = 300;
  ShotBudget shots = ShotBudget::infinite();
  RotationConvention convention = RotationConvention::half_angle;
  double gamma = 0.25;
  std::vector<double> cvar_coefficients{1.0, 0.5, 0.25, 0.125};
  QgtSettings qgt;
  MlpSettings mlp;
  double init_low = 0.0;
  double init_high = 2.0 * std::numbers::pi;

  ShiftRule resolved_shift_rule() const { return shift_rule.value_or(default_shift_rule(convention)); }

  void validate() const {
    detail::require(std::isfinite(learning_rate) && learning_rate > 0.0,
                    "optimizer: learning rate must be positive");
    detail::require(num_qubits >= 1, "optimizer: at least one qubit required");
    const auto rule = resolved_shift_rule();
    detail::require(rule.shift > 0.0 && rule.shift <= std::numbers::pi,
                    "optimizer: shift must lie in (0, pi]");
    detail::require(rule.scale > 0.0, "optimizer: shift scale must be positive");
    detail::check_gamma(gamma);
    detail::require(init_high > init_low, "optimizer: empty initialisation range");
    if (method == Method::cvar_gd) {
      detail::require(num_qubits >= 4, "optimizer: cvar_gd needs at least four qubits");
    }
  }

  /// Loss evaluator implied by the method.
  LossEvaluator evaluator() const {
    if (method == Method::cvar_gd) {
      return LossEvaluator::cvar(cvar_coefficients, gamma, shots, num_qubits, convention);
    }
    return LossEvaluator::mean(Observable::global_z(num_qubits), shots, convention);
  }
};

/// Component k: kappa [L(theta + s e_k) - L(theta - s e_k)], each side with a
/// fresh stream.
inline std::vector<double> parameter_shift_gradient(const Angles& theta,
                                                    const LossEvaluator& evaluator,
                                                    ShiftRule rule, const StepStreams& streams) {
  detail::require(rule.shift > 0.0 && rule.shift <= std::numbers::pi, "shift must lie in (0, pi]");
  detail::require(rule.scale > 0.0, "shift scale must be positive");
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto plus_rng = streams.stream(evaluation_id::shift_plus(k));
    auto minus_rng = streams.stream(evaluation_id::shift_minus(k));
    const double plus = evaluator.evaluate(theta.shifted(k, rule.shift), plus_rng);
    const double minus = evaluator.evaluate(theta.shifted(k, -rule.shift), minus_rng);
    grad[k] = rule.scale * (plus - minus);
  }
  return grad;
}

namespace detail {

inline Angles apply_update(const Angles& theta, std::span<const double> direction, double rate) {
  std::vector<double> next(theta.vector());
  for (std::size_t k = 0; k < next.size(); ++k) next[k] -= rate * direction[k];
  return Angles(std::move(next));
}

}  // namespace detail

/// theta - eta * gradient
inline Angles gd_step(const Angles& theta, const OptimizerConfig& config,
                      const LossEvaluator& evaluator, const StepStreams& streams) {
  const auto grad = parameter_shift_gradient(theta, evaluator, config.resolved_shift_rule(), streams);
  return detail::apply_update(theta, grad, config.learning_rate);
}

/// Fubini-Study metric of the single RX layer: Re G_ij with
/// G_ij = c (<X_i X_j> - <X_i><X_j>), c = 1/4 for exp(-i theta X/2) and 1 for
/// exp(-i theta X).
///
/// Analytic mode uses <X_i> = 0 and X_i^2 = 1, giving c * identity. Shot mode
/// samples N joint X-basis outcomes of all qubits and takes their (biased,
/// 1/N) covariance, which keeps the estimate positive semidefinite.
inline Eigen::MatrixXd qgt_rx_layer(const Angles& theta, QgtMode mode, RotationConvention conv,
                                    std::uint64_t shots, RngStream& rng) {
  const std::size_t n = theta.size();
  const double c = conv == RotationConvention::half_angle ? 0.25 : 1.0;
  if (mode == QgtMode::analytic) {
    return c * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  }
  detail::require(shots >= 1, "qgt: shot mode needs at least one shot");
  const auto state = prepare_rx_layer(theta, conv);
  const std::size_t words = (shots + 63) / 64;
  // bits[q][w]: shot outcomes of qubit q, bit set meaning -1.
  std::vector<std::vector<std::uint64_t>> bits(n, std::vector<std::uint64_t>(words, 0));
  std::vector<double> mean(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double p_minus = 0.5 * (1.0 - x_expectation(state, q));
    std::uint64_t minus = 0;
    for (std::uint64_t s = 0; s < shots; ++s) {
      if (rng.uniform01() < p_minus) {
        bits[q][s / 64] |= std::uint64_t{1} << (s % 64);
        ++minus;
      }
    }
    mean[q] = 1.0 - 2.0 * static_cast<double>(minus) / static_cast<double>(shots);
  }
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double inv = 1.0 / static_cast<double>(shots);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double xixj = 1.0;
      if (i != j) {
        std::uint64_t differ = 0;
        for (std::size_t w = 0; w < words; ++w) differ += std::popcount(bits[i][w] ^ bits[j][w]);
        xixj = 1.0 - 2.0 * static_cast<double>(differ) * inv;
      }
      const double v = c * (xixj - mean[i] * mean[j]);
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return g;
}

/// Eigendecomposition pseudo-inverse of a symmetric matrix. Eigenvalues of
/// (A + ridge I) below tolerance are treated as zero.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double tolerance = 1e-8,
                                      double ridge = 0.0) {
  detail::require(a.rows() == a.cols(), "pseudo-inverse: matrix must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  detail::require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                  "pseudo-inverse: matrix must be symmetric");
  Eigen::MatrixXd m = a;
  m.diagonal().array() += ridge;
  const bool diagonal = (m - Eigen::MatrixXd(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, i)) > tolerance) out(i, i) = 1.0 / m(i, i);
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd inv = eig.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    inv(i) = std::abs(inv(i)) > tolerance ? 1.0 / inv(i) : 0.0;
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

/// theta - eta * g^+ * gradient
inline Angles qng_step(const Angles& theta, const OptimizerConfig& config,
                       const LossEvaluator& evaluator, const StepStreams& streams) {
  const auto grad = parameter_shift_gradient(theta, evaluator, config.resolved_shift_rule(), streams);
  std::uint64_t metric_shots = 1;
  if (config.qgt.mode == QgtMode::shot_estimated) {
    detail::require(!evaluator.budget().is_infinite(),
                    "qng: shot-estimated metric needs a finite shot budget");
    metric_shots = evaluator.budget().shots();
  }
  auto rng = streams.stream(evaluation_id::metric);
  const Eigen::MatrixXd metric =
      qgt_rx_layer(theta, config.qgt.mode, config.convention, metric_shots, rng);
  const Eigen::MatrixXd inv = pseudo_inverse(metric, config.qgt.tolerance, config.qgt.ridge);
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), static_cast<Eigen::Index>(grad.size()));
  const Eigen::VectorXd direction = inv * g;
  return detail::apply_update(theta, std::span<const double>(direction.data(), grad.size()),
                              config.learning_rate);
}

/// Gradient descent on CVaR estimates of the prefix Hamiltonian.
inline Angles cvar_gd_step(const Angles& theta, const OptimizerConfig& config,
                           const LossEvaluator& evaluator, const StepStreams& streams) {
  detail::require(evaluator.is_cvar(), "cvar_gd: evaluator must use the CVaR map");
  return gd_step(theta, config, evaluator, streams);
}

/// lambda = d N / (2 d^2 + N d - 2)
inline double rps_lambda(double dimension, double shots) {
  detail::require(dimension >= 2.0, "rps: dimension must be at least 2");
  detail::require(shots >= 1.0, "rps: at least one shot required");
  return dimension * shots / (2.0 * dimension * dimension + shots * dimension - 2.0);
}

/// Gradient descent with the gradient rescaled by lambda(2^n, N); lambda = 1
/// for infinite shots.
inline Angles rps_step(const Angles& theta, const OptimizerConfig& config,
                       const LossEvaluator& evaluator, const StepStreams& streams) {
  auto grad = parameter_shift_gradient(theta, evaluator, config.resolved_shift_rule(), streams);
  if (!evaluator.budget().is_infinite()) {
    const double lambda = rps_lambda(std::ldexp(1.0, static_cast<int>(theta.size())),
                                     static_cast<double>(evaluator.budget().shots()));
    for (double& g : grad) g *= lambda;
  }
  return detail::apply_update(theta, grad, config.learning_rate);
}

/// One-hidden-layer tanh network mapping a fixed input to circuit angles:
/// theta = pi * tanh(W2 tanh(W1 x + b1) + b2).
struct MlpNetwork {
  Eigen::VectorXd input;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;

  /// Weights and biases uniform in [-scale, scale]; input all ones.
  static MlpNetwork random(std::size_t num_outputs, const MlpSettings& settings, RngStream& rng) {
    detail::require(num_outputs >= 1 && settings.input_dim >= 1, "mlp: empty layer");
    const auto in = static_cast<Eigen::Index>(settings.input_dim);
    const auto hidden = static_cast<Eigen::Index>(
        settings.hidden == 0 ? std::max<std::size_t>(8, num_outputs) : settings.hidden);
    const auto out = static_cast<Eigen::Index>(num_outputs);
    auto draw = [&] { return settings.init_scale * (2.0 * rng.uniform01() - 1.0); };
    MlpNetwork net;
    net.input = Eigen::VectorXd::Ones(in);
    net.w1.resize(hidden, in);
    net.b1.resize(hidden);
    net.w2.resize(out, hidden);
    net.b2.resize(out);
    for (Eigen::Index i = 0; i < hidden; ++i) {
      for (Eigen::Index j = 0; j < in; ++j) net.w1(i, j) = draw();
    }
    for (Eigen::Index i = 0; i < hidden; ++i) net.b1(i) = draw();
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < hidden; ++j) net.w2(i, j) = draw();
    }
    for (Eigen::Index i = 0; i < out; ++i) net.b2(i) = draw();
    return net;
  }

  void validate() const {
    detail::require(w1.cols() == input.size() && w1.rows() == b1.size() &&
                        w2.cols() == w1.rows() && w2.rows() == b2.size() && b2.size() >= 1,
                    "mlp: layer shape mismatch");
    detail::require(input.allFinite() && w1.allFinite() && b1.allFinite() && w2.allFinite() &&
                        b2.allFinite(),
                    "mlp: non-finite weights");
  }

  std::size_t num_parameters() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
  }
};

/// Gradient of a scalar with respect to every weight and bias.
struct MlpGradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

inline Angles nn_forward(const MlpNetwork& net) {
  net.validate();
  const Eigen::VectorXd h = (net.w1 * net.input + net.b1).array().tanh();
  const Eigen::VectorXd out = std::numbers::pi * (net.w2 * h + net.b2).array().tanh();
  return Angles(std::vector<double>(out.data(), out.data() + out.size()));
}

/// Reverse-mode accumulation of J^T v, where J is the Jacobian of nn_forward
/// with respect to the weights and v = dL/dtheta.
inline MlpGradient nn_backward(const MlpNetwork& net, std::span<const double> upstream) {
  net.validate();
  detail::require(static_cast<Eigen::Index>(upstream.size()) == net.b2.size(),
                  "mlp: upstream gradient has the wrong length");
  const Eigen::VectorXd h = (net.w1 * net.input + net.b1).array().tanh();
  const Eigen::ArrayXd t = (net.w2 * h + net.b2).array().tanh();
  const Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(upstream.data(), net.b2.size());
  const Eigen::VectorXd delta2 = (v * std::numbers::pi * (1.0 - t.square())).matrix();
  const Eigen::VectorXd delta1 =
      ((net.w2.transpose() * delta2).array() * (1.0 - h.array().square())).matrix();
  MlpGradient g;
  g.w2 = delta2 * h.transpose();
  g.b2 = delta2;
  g.w1 = delta1 * net.input.transpose();
  g.b1 = delta1;
  return g;
}

/// w <- w - eta J^T g with g the parameter-shift gradient at theta = nn_forward(net).
inline MlpNetwork nn_init_step(const MlpNetwork& net, const OptimizerConfig& config,
                               const LossEvaluator& evaluator, const StepStreams& streams) {
  const Angles theta = nn_forward(net);
  const auto grad = parameter_shift_gradient(theta, evaluator, config.resolved_shift_rule(), streams);
  const MlpGradient g = nn_backward(net, grad);
  MlpNetwork next = net;
  const double eta = config.learning_rate;
  next.w1 -= eta * g.w1;
  next.b1 -= eta * g.b1;
  next.w2 -= eta * g.w2;
  next.b2 -= eta * g.b2;
  return next;
}

/// Record of one optimisation run. thetas has steps + 1 entries and
/// updates[t] == thetas[t + 1] - thetas[t] exactly.
struct TrainingTrajectory {
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory_id = 0;
  OptimizerConfig config;
  std::vector<Angles> thetas;
  std::vector<double> loss_estimates;
  std::vector<std::vector<double>> updates;
  std::optional<std::string> error;

  std::size_t steps() const { return updates.size(); }
};

/// Initial parameters, uniform in [init_low, init_high) per component. Shared
/// across shot budgets and methods for the same (seed, trajectory).
inline Angles initial_angles(const OptimizerConfig& config, std::uint64_t master_seed,
                             std::uint64_t trajectory_id) {
  auto rng = RngStream::derive(master_seed, trajectory_id, 0, evaluation_id::initial_point);
  std::vector<double> theta(config.num_qubits);
  for (double& t : theta) t = config.init_low + (config.init_high - config.init_low) * rng.uniform01();
  return Angles(std::move(theta));
}

inline MlpNetwork initial_network(const OptimizerConfig& config, std::uint64_t master_seed,
                                  std::uint64_t trajectory_id) {
  auto rng = RngStream::derive(master_seed, trajectory_id, 0, evaluation_id::network_init);
  return MlpNetwork::random(config.num_qubits, config.mlp, rng);
}

/// Runs config.steps updates of the configured method. Deterministic in
/// (master_seed, trajectory_id). A failing step ends the run early with the
/// error recorded and the partial trajectory kept.
inline TrainingTrajectory run_training(const OptimizerConfig& config, std::uint64_t master_seed,
                                       std::uint64_t trajectory_id = 0) {
  config.validate();
  TrainingTrajectory traj;
  traj.master_seed = master_seed;
  traj.trajectory_id = trajectory_id;
  traj.config = config;
  const LossEvaluator evaluator = config.evaluator();

  std::optional<MlpNetwork> net;
  Angles theta;
  if (config.method == Method::nn_init) {
    net = initial_network(config, master_seed, trajectory_id);
    theta = nn_forward(*net);
  } else {
    theta = initial_angles(config, master_seed, trajectory_id);
  }

  auto record = [&](const Angles& point, std::uint64_t step) {
    auto rng = StepStreams(master_seed, trajectory_id, step).stream(evaluation_id::loss_record);
    traj.thetas.push_back(point);
    traj.loss_estimates.push_back(evaluator.evaluate(point, rng));
  };

  try {
    record(theta, 0);
    for (std::size_t t = 0; t < config.steps; ++t) {
      // Step t draws from stream step index t + 1; index 0 holds initialisation.
      const StepStreams streams(master_seed, trajectory_id, t + 1);
      Angles next;
      switch (config.method) {
        case Method::gd: next = gd_step(theta, config, evaluator, streams); break;
        case Method::qng: next = qng_step(theta, config, evaluator, streams); break;
        case Method::cvar_gd: next = cvar_gd_step(theta, config, evaluator, streams); break;
        case Method::rps: next = rps_step(theta, config, evaluator, streams); break;
        case Method::nn_init:
          net = nn_init_step(*net, config, evaluator, streams);
          next = nn_forward(*net);
          break;
      }
      std::vector<double> delta(next.size());
      for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = next[k] - theta[k];
      traj.updates.push_back(std::move(delta));
      theta = std::move(next);
      record(theta, t + 1);
    }
  } catch (const std::exception& e) {
    traj.error = e.what();
    // Keep thetas and updates aligned: drop a point whose loss record failed.
    if (traj.loss_estimates.size() < traj.thetas.size()) traj.thetas.pop_back();
    while (traj.updates.size() + 1 > traj.thetas.size() && !traj.updates.empty()) traj.updates.pop_back();
  }
  return traj;
}

}  // namespace qconc

#endif  // QCONC_OPTIMIZERS_HPP
