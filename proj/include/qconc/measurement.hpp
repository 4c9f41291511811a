#ifndef QCONC_MEASUREMENT_HPP
#define QCONC_MEASUREMENT_HPP

// Finite-outcome measurements: labelled POVMs, their exact outcome
// distributions and seeded finite-shot sampling. Shots are always drawn as
// multinomial counts, so the cost of one estimate is O(|M|) whatever N is.

#include <qconc/circuitsim.hpp>
#include <qconc/error.hpp>
#include <qconc/rng.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qconc {

/// Exact probability vector aligned with a list of real outcome labels.
class OutcomeDistribution {
 public:
  OutcomeDistribution(std::vector<double> labels, std::vector<double> probabilities)
      : labels_(std::move(labels)), probs_(std::move(probabilities)) {
    detail::require(labels_.size() == probs_.size(), "distribution: labels/probabilities mismatch");
    detail::require(labels_.size() >= 1, "distribution: empty");
    double total = 0.0;
    for (double& p : probs_) {
      detail::require(std::isfinite(p) && p >= -1e-12 && p <= 1.0 + 1e-12,
                      "distribution: probability outside [0, 1]");
      p = std::clamp(p, 0.0, 1.0);
      total += p;
    }
    detail::require(std::abs(total - 1.0) <= 1e-10, "distribution: probabilities do not sum to 1");
  }

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> labels() const noexcept { return labels_; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  double label(std::size_t k) const { return labels_.at(k); }
  double probability(std::size_t k) const { return probs_.at(k); }

  /// sum_k label_k p_k
  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) m += labels_[k] * probs_[k];
    return m;
  }

 private:
  std::vector<double> labels_;
  std::vector<double> probs_;
};

/// Outcome counts from N shots of one POVM.
class SampleSet {
 public:
  SampleSet(std::vector<double> labels, std::vector<std::uint64_t> counts)
      : labels_(std::move(labels)), counts_(std::move(counts)) {
    detail::require(labels_.size() == counts_.size(), "sample set: labels/counts mismatch");
    total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    detail::require(total_ >= 1, "sample set: at least one shot required");
  }

  std::span<const double> labels() const noexcept { return labels_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t shots() const noexcept { return total_; }

  bool operator==(const SampleSet&) const = default;

 private:
  std::vector<double> labels_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// A labelled measurement together with the rule mapping a parameter point to
/// its outcome distribution.
class PovmSpec {
 public:
  using ProbabilityRule = std::function<std::vector<double>(const Angles&)>;

  PovmSpec(std::string name, std::vector<double> labels, ProbabilityRule rule)
      : name_(std::move(name)), labels_(std::move(labels)), rule_(std::move(rule)) {
    detail::require(labels_.size() >= 2, "povm: at least two outcomes required");
    auto sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                    "povm: labels must be distinct");
  }

  const std::string& name() const noexcept { return name_; }
  std::span<const double> labels() const noexcept { return labels_; }

  /// |M|, the number of outcomes.
  std::size_t cardinality() const noexcept { return labels_.size(); }

  OutcomeDistribution distribution(const Angles& alpha) const {
    return OutcomeDistribution(labels_, rule_(alpha));
  }

 private:
  std::string name_;
  std::vector<double> labels_;
  ProbabilityRule rule_;
};

/// Two-outcome measurement of a Z-parity term: +1 with (1 + <Z_mask>)/2.
inline PovmSpec pauli_term_povm(const PauliZTerm& term,
                                RotationConvention conv = RotationConvention::half_angle) {
  const QubitMask mask = term.mask;
  return PovmSpec("z_parity", {1.0, -1.0}, [mask, conv](const Angles& theta) {
    const double e = z_parity_expectation(theta, mask, conv);
    return std::vector<double>{0.5 * (1.0 + e), 0.5 * (1.0 - e)};
  });
}

/// Two-outcome X measurement of one qubit.
inline PovmSpec x_basis_povm(std::size_t qubit,
                             RotationConvention conv = RotationConvention::half_angle) {
  return PovmSpec("x_basis", {1.0, -1.0}, [qubit, conv](const Angles& theta) {
    const double e = x_expectation(prepare_rx_layer(theta, conv), qubit);
    return std::vector<double>{0.5 * (1.0 + e), 0.5 * (1.0 - e)};
  });
}

/// Overlap test {|0><0|, 1 - |0><0|} on U^dagger(x2) U(x)|0>, labelled 1 and 0
/// so the empirical mean estimates the fidelity kernel.
inline PovmSpec fidelity_kernel_povm(Angles x2,
                                     RotationConvention conv = RotationConvention::half_angle) {
  return PovmSpec("overlap_test", {1.0, 0.0}, [x2 = std::move(x2), conv](const Angles& x) {
    const double p = fidelity_kernel_probability(x, x2, conv);
    return std::vector<double>{p, 1.0 - p};
  });
}

/// Eigenvalue measurement of the four-term prefix Hamiltonian.
struct CvarPovm {
  PovmSpec spec;
  OutcomeDistribution distribution;
  std::vector<std::string> warnings;
};

namespace detail {

/// Probability of each sign pattern (s1, s2, s3, s4), index bit j set meaning
/// s_{j+1} = -1. s4 is the parity P of qubits 0..n-4 and s3 = P z_a,
/// s2 = s3 z_b, s1 = s2 z_c for the last three qubits a, b, c, which are
/// independent in a product state.
inline std::array<double, 16> cvar_sign_pattern_probabilities(const Angles& theta,
                                                              RotationConvention conv) {
  const std::size_t n = theta.size();
  require(n >= 4, "cvar povm: needs at least four qubits");
  double parity = 1.0;
  for (std::size_t q = 0; q + 3 < n; ++q) parity *= single_qubit_z(theta[q], conv);
  const std::array<double, 2> p_parity{0.5 * (1.0 + parity), 0.5 * (1.0 - parity)};
  std::array<std::array<double, 2>, 3> p_bit{};
  for (std::size_t j = 0; j < 3; ++j) {
    const double z = single_qubit_z(theta[n - 3 + j], conv);
    p_bit[j] = {0.5 * (1.0 + z), 0.5 * (1.0 - z)};
  }
  std::array<double, 16> out{};
  for (int ip = 0; ip < 2; ++ip) {
    for (int ia = 0; ia < 2; ++ia) {
      for (int ib = 0; ib < 2; ++ib) {
        for (int ic = 0; ic < 2; ++ic) {
          const int s4 = ip;
          const int s3 = s4 ^ ia;
          const int s2 = s3 ^ ib;
          const int s1 = s2 ^ ic;
          const int pattern = s1 | (s2 << 1) | (s3 << 2) | (s4 << 3);
          out[pattern] = p_parity[ip] * p_bit[0][ia] * p_bit[1][ib] * p_bit[2][ic];
        }
      }
    }
  }
  return out;
}

inline double sign_pattern_value(int pattern, std::span<const double> c) {
  double v = 0.0;
  for (int j = 0; j < 4; ++j) v += ((pattern >> j) & 1 ? -1.0 : 1.0) * c[j];
  return v;
}

/// Groups the 16 sign patterns by eigenvalue, ascending. Values closer than a
/// relative 1e-12 are merged.
struct EigenvalueGrouping {
  std::vector<double> labels;
  std::vector<std::vector<int>> patterns;
};

inline EigenvalueGrouping group_cvar_eigenvalues(std::span<const double> c) {
  std::vector<std::pair<double, int>> values;
  double scale = 0.0;
  for (double x : c) scale += std::abs(x);
  for (int pattern = 0; pattern < 16; ++pattern) {
    values.emplace_back(sign_pattern_value(pattern, c), pattern);
  }
  std::stable_sort(values.begin(), values.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  EigenvalueGrouping g;
  for (const auto& [value, pattern] : values) {
    if (!g.labels.empty() && std::abs(value - g.labels.back()) <= 1e-12 * std::max(scale, 1.0)) {
      g.patterns.back().push_back(pattern);
    } else {
      g.labels.push_back(value);
      g.patterns.push_back({pattern});
    }
  }
  return g;
}

}  // namespace detail

/// Measurement of H = sum_j c_j Z_{prefix(n - j + 1)} in its eigenbasis.
///
/// Labels are the distinct eigenvalues in ascending order. Sixteen for
/// generic coefficients; coinciding eigenvalues are merged and reported.
inline PovmSpec cvar_eigenvalue_povm_spec(std::span<const double> coefficients,
                                          RotationConvention conv = RotationConvention::half_angle,
                                          std::vector<std::string>* warnings = nullptr) {
  detail::require(coefficients.size() == 4, "cvar povm: exactly four coefficients required");
  for (double c : coefficients) detail::require(std::isfinite(c), "cvar povm: coefficient not finite");
  auto grouping = std::make_shared<detail::EigenvalueGrouping>(
      detail::group_cvar_eigenvalues(coefficients));
  if (warnings != nullptr && grouping->labels.size() < 16) {
    warnings->push_back("cvar povm: degenerate coefficients merged 16 sign patterns into " +
                        std::to_string(grouping->labels.size()) + " eigenvalues");
  }
  detail::require(grouping->labels.size() >= 2, "cvar povm: all eigenvalues coincide");
  return PovmSpec("cvar_eigenvalues", grouping->labels, [grouping, conv](const Angles& theta) {
    const auto patterns = detail::cvar_sign_pattern_probabilities(theta, conv);
    std::vector<double> p(grouping->labels.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (int pattern : grouping->patterns[k]) p[k] += patterns[pattern];
    }
    return p;
  });
}

inline CvarPovm cvar_eigenvalue_povm(std::span<const double> coefficients, const Angles& theta,
                                     RotationConvention conv = RotationConvention::half_angle) {
  std::vector<std::string> warnings;
  auto spec = cvar_eigenvalue_povm_spec(coefficients, conv, &warnings);
  auto dist = spec.distribution(theta);
  return CvarPovm{std::move(spec), std::move(dist), std::move(warnings)};
}

/// Multinomial counts for N shots, drawn as a chain of conditional binomials.
inline SampleSet sample(const OutcomeDistribution& dist, std::uint64_t shots, RngStream& rng) {
  detail::require(shots >= 1, "sample: at least one shot required");
  const auto p = dist.probabilities();
  std::vector<std::uint64_t> counts(p.size(), 0);
  std::uint64_t remaining = shots;
  double mass_left = 1.0;
  for (std::size_t k = 0; k + 1 < p.size() && remaining > 0; ++k) {
    if (p[k] <= 0.0) continue;
    const double q = mass_left > 0.0 ? std::min(1.0, p[k] / mass_left) : 1.0;
    if (q >= 1.0) {
      counts[k] = remaining;
      remaining = 0;
      break;
    }
    std::binomial_distribution<std::uint64_t> binom(remaining, q);
    counts[k] = binom(rng);
    remaining -= counts[k];
    mass_left -= p[k];
  }
  if (remaining > 0) {
    // Remaining shots go to the last outcome with positive probability.
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] <= 0.0) --last;
    counts[last] += remaining;
  }
  return SampleSet(std::vector<double>(dist.labels().begin(), dist.labels().end()),
                   std::move(counts));
}

/// counts / N
inline OutcomeDistribution empirical_distribution(const SampleSet& s) {
  std::vector<double> p;
  p.reserve(s.counts().size());
  const double n = static_cast<double>(s.shots());
  for (auto c : s.counts()) p.push_back(static_cast<double>(c) / n);
  return OutcomeDistribution(std::vector<double>(s.labels().begin(), s.labels().end()),
                             std::move(p));
}

}  // namespace qconc

#endif  // QCONC_MEASUREMENT_HPP
