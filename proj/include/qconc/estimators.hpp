#ifndef QCONC_ESTIMATORS_HPP
#define QCONC_ESTIMATORS_HPP

// Post-processing maps from sample sets (or lists of estimates) to scalars.

#include <qconc/error.hpp>
#include <qconc/measurement.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

namespace qconc {

struct EmpiricalMean {};

/// Mean of the lowest ceil(gamma N) outcomes.
struct Cvar {
  double gamma = 1.0;
};

using EstimatorKind = std::variant<EmpiricalMean, Cvar>;

namespace detail {

inline void check_gamma(double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0 && gamma <= 1.0, "cvar: gamma must lie in (0, 1]");
}

}  // namespace detail

/// sum_k label_k count_k / N
inline double mean_map(const SampleSet& s) {
  const auto labels = s.labels();
  const auto counts = s.counts();
  double acc = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) acc += labels[k] * static_cast<double>(counts[k]);
  return acc / static_cast<double>(s.shots());
}

/// Number of retained samples, ceil(gamma N). A small relative slack keeps
/// gamma N that is integral up to rounding (e.g. 0.1 * 30) from rounding up.
inline std::uint64_t cvar_sample_count(double gamma, std::uint64_t shots) {
  detail::check_gamma(gamma);
  const double x = gamma * static_cast<double>(shots);
  auto k = static_cast<std::uint64_t>(std::ceil(x - 1e-12 * x));
  return std::clamp<std::uint64_t>(k, 1, shots);
}

/// CVaR over counts: walks labels in ascending order and takes a partial count
/// from the boundary label, which equals the sorted-sample definition.
inline double cvar_map(const SampleSet& s, double gamma) {
  const std::uint64_t keep = cvar_sample_count(gamma, s.shots());
  const auto labels = s.labels();
  const auto counts = s.counts();
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::uint64_t left = keep;
  double acc = 0.0;
  for (std::size_t k : order) {
    if (left == 0) break;
    const std::uint64_t take = std::min(left, counts[k]);
    acc += labels[k] * static_cast<double>(take);
    left -= take;
  }
  return acc / static_cast<double>(keep);
}

/// Infinite-shot analogue of cvar_map: the lowest gamma probability mass of
/// the exact distribution.
inline double cvar_exact(const OutcomeDistribution& dist, double gamma) {
  detail::check_gamma(gamma);
  const auto labels = dist.labels();
  const auto probs = dist.probabilities();
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  double left = gamma;
  double acc = 0.0;
  for (std::size_t k : order) {
    if (left <= 0.0) break;
    const double take = std::min(left, probs[k]);
    acc += labels[k] * take;
    left -= take;
  }
  return acc / gamma;
}

inline double estimate(const SampleSet& s, const EstimatorKind& kind) {
  if (const auto* c = std::get_if<Cvar>(&kind)) return cvar_map(s, c->gamma);
  return mean_map(s);
}

/// sum_i c_i est_i
inline double linear_combination(std::span<const double> estimates,
                                 std::span<const double> coefficients) {
  detail::require(estimates.size() == coefficients.size(), "linear combination: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) acc += coefficients[i] * estimates[i];
  return acc;
}

/// (1/N) sum_i (y_i - prediction_i)^2
inline double mse_map(std::span<const double> predictions, std::span<const double> targets) {
  detail::require(predictions.size() == targets.size(), "mse: length mismatch");
  detail::require(!predictions.empty(), "mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = targets[i] - predictions[i];
    acc += r * r;
  }
  return acc / static_cast<double>(predictions.size());
}

}  // namespace qconc

#endif  // QCONC_ESTIMATORS_HPP
