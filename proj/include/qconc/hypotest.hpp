#ifndef QCONC_HYPOTEST_HPP
#define QCONC_HYPOTEST_HPP

// Binary hypothesis testing between two finite discrete distributions.
//
// Distributions are either explicit probability vectors or the implicit
// "alternating" family where every odd outcome (1-based) has one probability
// and every even outcome another. The implicit form lets the support size be
// 2^n or larger without materialising a vector.

#include <qconc/error.hpp>
#include <qconc/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qconc {

/// Success probability at or above which a test is called distinguishing.
/// Only used to annotate reports.
inline constexpr double kDistinguishabilityThreshold = 0.51;

class DiscreteDistribution {
 public:
  /// Probability vector over outcomes 1..size.
  static DiscreteDistribution explicit_probabilities(std::vector<double> p) {
    detail::require(!p.empty(), "distribution: empty support");
    double total = 0.0;
    for (double x : p) {
      detail::require(std::isfinite(x) && x >= 0.0, "distribution: negative or non-finite entry");
      total += x;
    }
    detail::require(std::abs(total - 1.0) <= 1e-10, "distribution: not normalised");
    return DiscreteDistribution(Explicit{std::move(p)});
  }

  /// Odd outcomes have probability odd_p, even outcomes even_p; M even.
  static DiscreteDistribution alternating(std::uint64_t support, double odd_p, double even_p) {
    detail::require(support >= 2 && support % 2 == 0, "alternating distribution: support must be even");
    detail::require(odd_p >= 0.0 && even_p >= 0.0, "alternating distribution: negative probability");
    const double half = static_cast<double>(support / 2);
    detail::require(std::abs(half * (odd_p + even_p) - 1.0) <= 1e-10,
                    "alternating distribution: not normalised");
    return DiscreteDistribution(Alternating{support, odd_p, even_p});
  }

  static DiscreteDistribution uniform(std::uint64_t support) {
    detail::require(support >= 1, "uniform distribution: empty support");
    if (support % 2 == 0) {
      const double p = 1.0 / static_cast<double>(support);
      return alternating(support, p, p);
    }
    return explicit_probabilities(std::vector<double>(support, 1.0 / static_cast<double>(support)));
  }

  std::uint64_t support_size() const {
    if (const auto* e = std::get_if<Explicit>(&repr_)) return e->p.size();
    return std::get<Alternating>(repr_).support;
  }

  bool is_implicit() const noexcept { return std::holds_alternative<Alternating>(repr_); }

  /// Probability of outcome (1-based).
  double probability(std::uint64_t outcome) const {
    detail::require(outcome >= 1 && outcome <= support_size(), "distribution: outcome out of range");
    if (const auto* e = std::get_if<Explicit>(&repr_)) return e->p[outcome - 1];
    const auto& a = std::get<Alternating>(repr_);
    return outcome % 2 == 1 ? a.odd_p : a.even_p;
  }

  /// Draws one outcome (1-based).
  std::uint64_t sample(RngStream& rng) const {
    if (const auto* e = std::get_if<Explicit>(&repr_)) {
      const double u = rng.uniform01();
      double acc = 0.0;
      std::uint64_t last_positive = 1;
      for (std::size_t i = 0; i < e->p.size(); ++i) {
        if (e->p[i] <= 0.0) continue;
        last_positive = i + 1;
        acc += e->p[i];
        if (u < acc) return i + 1;
      }
      return last_positive;
    }
    const auto& a = std::get<Alternating>(repr_);
    const double odd_mass = static_cast<double>(a.support / 2) * a.odd_p;
    const bool odd = rng.uniform01() < odd_mass;
    const std::uint64_t slot = rng() % (a.support / 2);
    return odd ? 2 * slot + 1 : 2 * slot + 2;
  }

  /// Parameters of the implicit form, if any: (support, odd_p, even_p).
  struct AlternatingView {
    std::uint64_t support;
    double odd_p;
    double even_p;
  };
  std::optional<AlternatingView> alternating_view() const {
    if (const auto* a = std::get_if<Alternating>(&repr_)) {
      return AlternatingView{a->support, a->odd_p, a->even_p};
    }
    return std::nullopt;
  }

 private:
  struct Explicit {
    std::vector<double> p;
  };
  struct Alternating {
    std::uint64_t support;
    double odd_p;
    double even_p;
  };

  explicit DiscreteDistribution(std::variant<Explicit, Alternating> repr) : repr_(std::move(repr)) {}

  std::variant<Explicit, Alternating> repr_;
};

/// Supports up to this size may be enumerated outcome by outcome.
inline constexpr std::uint64_t kMaxEnumeratedSupport = std::uint64_t{1} << 24;

/// sum_s |p(s) - p2(s)|
inline double one_norm(const DiscreteDistribution& p, const DiscreteDistribution& p2) {
  detail::require(p.support_size() == p2.support_size(), "one_norm: support mismatch");
  const auto a = p.alternating_view();
  const auto b = p2.alternating_view();
  if (a && b) {
    const double half = static_cast<double>(a->support / 2);
    return half * (std::abs(a->odd_p - b->odd_p) + std::abs(a->even_p - b->even_p));
  }
  detail::require(p.support_size() <= kMaxEnumeratedSupport,
                  "one_norm: support too large to enumerate");
  double acc = 0.0;
  for (std::uint64_t s = 1; s <= p.support_size(); ++s) {
    acc += std::abs(p.probability(s) - p2.probability(s));
  }
  return acc;
}

/// Best single-sample success probability, 1/2 + ||P - P'||_1 / 4.
inline double optimal_success_probability(const DiscreteDistribution& p,
                                          const DiscreteDistribution& p2) {
  return 0.5 + 0.25 * one_norm(p, p2);
}

/// Upper bound on N-sample success, min(1, 1/2 + N ||P - P'||_1 / 4).
inline double many_sample_success_bound(const DiscreteDistribution& p,
                                        const DiscreteDistribution& p2, std::uint64_t shots) {
  detail::require(shots >= 1, "success bound: at least one sample required");
  return std::min(1.0, 0.5 + 0.25 * static_cast<double>(shots) * one_norm(p, p2));
}

struct ProductNormCheck {
  double exact = 0.0;
  double bound = 0.0;
};

/// Exact 1-norm between the product distributions (full enumeration) and the
/// sum of factor-wise 1-norms that bounds it. At most three factors of support
/// at most four.
inline ProductNormCheck product_one_norm_check(
    const std::vector<std::pair<DiscreteDistribution, DiscreteDistribution>>& factors) {
  detail::require(!factors.empty() && factors.size() <= 3,
                  "product check: between one and three factors supported");
  std::vector<std::uint64_t> sizes;
  ProductNormCheck out;
  for (const auto& [p, p2] : factors) {
    detail::require(p.support_size() == p2.support_size(), "product check: support mismatch");
    detail::require(p.support_size() <= 4, "product check: factor support above four");
    sizes.push_back(p.support_size());
    out.bound += one_norm(p, p2);
  }
  std::vector<std::uint64_t> idx(factors.size(), 1);
  while (true) {
    double a = 1.0;
    double b = 1.0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      a *= factors[f].first.probability(idx[f]);
      b *= factors[f].second.probability(idx[f]);
    }
    out.exact += std::abs(a - b);
    std::size_t f = 0;
    while (f < idx.size() && idx[f] == sizes[f]) idx[f++] = 1;
    if (f == idx.size()) break;
    ++idx[f];
  }
  return out;
}

struct TestOutcome {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  double bound = 0.0;

  /// Binomial standard error of rate.
  double standard_error() const {
    return trials == 0 ? 0.0 : std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
  }
  bool distinguishing() const { return rate >= kDistinguishabilityThreshold; }
};

/// Monte-Carlo of the likelihood-ratio test. Each trial picks the true
/// hypothesis uniformly, draws N samples from it and decides H0 (samples from
/// P) when the log-likelihood ratio is >= 0, so ties go to the null.
inline TestOutcome simulate_hypothesis_test(const DiscreteDistribution& p,
                                            const DiscreteDistribution& p2, std::uint64_t shots,
                                            std::uint64_t trials, RngStream& rng) {
  detail::require(shots >= 1 && trials >= 1, "hypothesis test: need samples and trials");
  detail::require(p.support_size() == p2.support_size(), "hypothesis test: support mismatch");
  TestOutcome out;
  out.trials = trials;
  out.bound = many_sample_success_bound(p, p2, shots);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < trials; ++t) {
    const bool truth_is_null = (rng() & 1U) == 0;
    const auto& source = truth_is_null ? p : p2;
    double llr = 0.0;
    bool forced = false;
    for (std::uint64_t s = 0; s < shots && !forced; ++s) {
      const std::uint64_t x = source.sample(rng);
      const double a = p.probability(x);
      const double b = p2.probability(x);
      if (a == 0.0) {
        llr = -inf;
        forced = true;
      } else if (b == 0.0) {
        llr = inf;
        forced = true;
      } else {
        llr += std::log(a) - std::log(b);
      }
    }
    const bool decide_null = llr >= 0.0;
    if (decide_null == truth_is_null) ++out.successes;
  }
  out.rate = static_cast<double>(out.successes) / static_cast<double>(trials);
  return out;
}

/// (delta, epsilon) indistinguishability bound from a concentration strength
/// beta, POVM cardinality |M| and N shots: delta = |M| sqrt(beta),
/// epsilon = N |M| beta^(1/4) / 4.
struct HypothesisCertificate {
  double delta = 0.0;
  double epsilon = 0.0;
  double beta = 0.0;
  std::uint64_t cardinality = 0;
  std::uint64_t shots = 0;
  bool vacuous = false;
};

inline HypothesisCertificate indistinguishability_certificate(double beta, std::uint64_t cardinality,
                                                              std::uint64_t shots) {
  detail::require(std::isfinite(beta) && beta > 0.0 && beta <= 1.0, "certificate: beta must lie in (0, 1]");
  detail::require(cardinality >= 2, "certificate: cardinality must be at least 2");
  detail::require(shots >= 1, "certificate: at least one shot required");
  HypothesisCertificate c;
  c.beta = beta;
  c.cardinality = cardinality;
  c.shots = shots;
  const double m = static_cast<double>(cardinality);
  c.delta = m * std::sqrt(beta);
  c.epsilon = static_cast<double>(shots) * m * std::sqrt(std::sqrt(beta)) / 4.0;
  c.vacuous = c.epsilon >= 0.5 || c.delta >= 1.0;
  return c;
}

struct DistributionPair {
  DiscreteDistribution parameterised;
  DiscreteDistribution fixed;
};

/// Odd outcomes 2/M, even outcomes 0, against uniform 1/M. 1-norm 1.
inline DistributionPair counterexample_family(std::uint64_t support) {
  detail::require(support >= 2 && support % 2 == 0, "counterexample family: M must be even");
  const double m = static_cast<double>(support);
  return {DiscreteDistribution::alternating(support, 2.0 / m, 0.0),
          DiscreteDistribution::uniform(support)};
}

/// Odd outcomes 1/M + 1/M^2, even 1/M - 1/M^2, against uniform. 1-norm 1/M.
inline DistributionPair indistinguishable_family(std::uint64_t support) {
  detail::require(support >= 2 && support % 2 == 0, "indistinguishable family: M must be even");
  const double m = static_cast<double>(support);
  return {DiscreteDistribution::alternating(support, 1.0 / m + 1.0 / (m * m), 1.0 / m - 1.0 / (m * m)),
          DiscreteDistribution::uniform(support)};
}

/// Parity test: decide the parameterised hypothesis iff every sample is odd.
/// Returns true for the null decision.
inline bool parity_test_decides_null(const std::vector<std::uint64_t>& samples) {
  return std::all_of(samples.begin(), samples.end(), [](std::uint64_t s) { return s % 2 == 1; });
}

/// Exact error of the parity test on the counterexample family, 2^-(N+1).
inline double parity_test_error(std::uint64_t shots) {
  detail::require(shots >= 1, "parity test: at least one sample required");
  return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(shots, 2000)) - 1);
}

/// Monte-Carlo of the parity test; rate is the empirical error probability and
/// bound the exact value 2^-(N+1).
inline TestOutcome simulate_parity_test(std::uint64_t support, std::uint64_t shots,
                                        std::uint64_t trials, RngStream& rng) {
  detail::require(trials >= 1, "parity test: at least one trial required");
  const auto family = counterexample_family(support);
  TestOutcome out;
  out.trials = trials;
  out.bound = parity_test_error(shots);
  std::uint64_t errors = 0;
  std::vector<std::uint64_t> samples(shots);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const bool truth_is_null = (rng() & 1U) == 0;
    const auto& source = truth_is_null ? family.parameterised : family.fixed;
    for (auto& s : samples) s = source.sample(rng);
    if (parity_test_decides_null(samples) != truth_is_null) ++errors;
  }
  out.successes = trials - errors;
  out.rate = static_cast<double>(errors) / static_cast<double>(trials);
  return out;
}

}  // namespace qconc

#endif  // QCONC_HYPOTEST_HPP
