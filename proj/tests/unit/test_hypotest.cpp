#include <qconc/hypotest.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace qconc;

namespace {

// Exact success probability of the likelihood-ratio test (ties to the null)
// by enumerating every length-N outcome sequence.
double exact_lrt_success(const std::vector<double>& p, const std::vector<double>& q, int shots) {
  double success = 0.0;
  std::function<void(int, double, double, double)> rec = [&](int depth, double pp, double qq, double llr) {
    if (depth == shots) {
      const bool null = llr >= 0.0;
      success += 0.5 * (null ? pp : qq);
      return;
    }
    for (std::size_t x = 0; x < p.size(); ++x) {
      double step = 0.0;
      if (p[x] == 0.0) step = -INFINITY;
      else if (q[x] == 0.0) step = INFINITY;
      else step = std::log(p[x]) - std::log(q[x]);
      rec(depth + 1, pp * p[x], qq * q[x], llr + step);
    }
  };
  rec(0, 1.0, 1.0, 0.0);
  return success;
}

}  // namespace

TEST(Hypotest, OneNormExplicit) {
  const auto p = DiscreteDistribution::explicit_probabilities({0.75, 0.25});
  const auto q = DiscreteDistribution::explicit_probabilities({0.25, 0.75});
  EXPECT_DOUBLE_EQ(one_norm(p, q), 1.0);
  EXPECT_DOUBLE_EQ(optimal_success_probability(p, q), 0.75);
  EXPECT_DOUBLE_EQ(many_sample_success_bound(p, q, 1), 0.75);
  EXPECT_DOUBLE_EQ(many_sample_success_bound(p, q, 3), 1.0);
}

TEST(Hypotest, FamiliesClosedForms) {
  for (std::uint64_t m : {4ULL, 16ULL, 1ULL << 16, 1ULL << 30}) {
    const auto ce = counterexample_family(m);
    EXPECT_NEAR(one_norm(ce.parameterised, ce.fixed), 1.0, 1e-12);
    const auto ind = indistinguishable_family(m);
    EXPECT_NEAR(one_norm(ind.parameterised, ind.fixed), 1.0 / static_cast<double>(m), 1e-15);
  }
  const auto ind = indistinguishable_family(1ULL << 16);
  EXPECT_EQ(many_sample_success_bound(ind.parameterised, ind.fixed, 100), 0.5 + 100.0 / std::ldexp(1.0, 18));
}

TEST(Hypotest, ImplicitMatchesExplicitEnumeration) {
  const auto ind = indistinguishable_family(8);
  std::vector<double> p;
  std::vector<double> q;
  for (std::uint64_t i = 1; i <= 8; ++i) {
    p.push_back(ind.parameterised.probability(i));
    q.push_back(ind.fixed.probability(i));
  }
  EXPECT_NEAR(one_norm(DiscreteDistribution::explicit_probabilities(p), DiscreteDistribution::explicit_probabilities(q)),
              one_norm(ind.parameterised, ind.fixed), 1e-15);
}

TEST(Hypotest, LikelihoodTestMatchesEnumeration) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<double> p(3);
    std::vector<double> q(3);
    double sp = 0.0;
    double sq = 0.0;
    for (int i = 0; i < 3; ++i) {
      sp += (p[i] = u(gen));
      sq += (q[i] = u(gen));
    }
    for (int i = 0; i < 3; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const int shots = 1 + trial % 3;
    const double exact = exact_lrt_success(p, q, shots);
    RngStream rng(trial, 0);
    const auto r = simulate_hypothesis_test(DiscreteDistribution::explicit_probabilities(p),
                                            DiscreteDistribution::explicit_probabilities(q), shots, 40000, rng);
    EXPECT_NEAR(r.rate, exact, 4.0 * std::sqrt(exact * (1 - exact) / 40000));
    EXPECT_LE(exact, r.bound + 1e-12);
  }
}

TEST(Hypotest, SingleSampleOptimum) {
  const auto p = DiscreteDistribution::explicit_probabilities({0.75, 0.25});
  const auto q = DiscreteDistribution::explicit_probabilities({0.25, 0.75});
  EXPECT_NEAR(exact_lrt_success({0.75, 0.25}, {0.25, 0.75}, 1), 0.75, 1e-15);
  RngStream rng(1, 1);
  const auto r = simulate_hypothesis_test(p, q, 1, 10000, rng);
  EXPECT_NEAR(r.rate, 0.75, 3 * std::sqrt(0.75 * 0.25 / 10000));
  EXPECT_TRUE(r.distinguishing());
}

TEST(Hypotest, ProductNormCheckSubmultiplicativeBound) {
  const auto p = DiscreteDistribution::explicit_probabilities({0.6, 0.4});
  const auto q = DiscreteDistribution::explicit_probabilities({0.5, 0.5});
  const auto r = product_one_norm_check({{p, q}, {p, q}});
  EXPECT_LE(r.exact, r.bound + 1e-15);
  // (0.36, 0.24, 0.24, 0.16) vs uniform 0.25.
  EXPECT_NEAR(r.exact, 0.11 + 0.01 + 0.01 + 0.09, 1e-15);
  EXPECT_NEAR(r.bound, 0.4, 1e-15);
}

TEST(Hypotest, CertificateValues) {
  const auto c = indistinguishability_certificate(std::ldexp(1.0, -40), 2, 100);
  EXPECT_NEAR(c.delta, 2.0 * std::ldexp(1.0, -20), 1e-20);
  EXPECT_NEAR(c.delta, 1.9073486328125e-06, 1e-18);
  EXPECT_NEAR(c.epsilon, 100.0 * 2.0 * std::ldexp(1.0, -10) / 4.0, 1e-15);
  EXPECT_NEAR(c.epsilon, 0.048828125, 1e-15);
  EXPECT_FALSE(c.vacuous);
  EXPECT_TRUE(indistinguishability_certificate(1.0, 2, 1).vacuous);
  EXPECT_THROW(indistinguishability_certificate(0.0, 2, 1), InvalidInput);
  EXPECT_THROW(indistinguishability_certificate(0.5, 1, 1), InvalidInput);
}

TEST(Hypotest, ParityTest) {
  EXPECT_EQ(parity_test_error(1), 0.25);
  EXPECT_EQ(parity_test_error(3), 0.0625);
  EXPECT_EQ(parity_test_error(10), std::ldexp(1.0, -11));
  EXPECT_TRUE(parity_test_decides_null({1, 3, 5}));
  EXPECT_FALSE(parity_test_decides_null({1, 2}));
  RngStream rng(2, 2);
  const auto r = simulate_parity_test(16, 3, 100000, rng);
  EXPECT_NEAR(r.rate, 0.0625, 3 * std::sqrt(0.0625 * 0.9375 / 100000));
}

TEST(Hypotest, ImplicitSamplingOnHugeSupport) {
  const auto ce = counterexample_family(1ULL << 40);
  RngStream rng(3, 3);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(ce.parameterised.sample(rng) % 2, 1u);
}

TEST(Hypotest, InvalidInputs) {
  EXPECT_THROW(DiscreteDistribution::explicit_probabilities({0.5, 0.6}), InvalidInput);
  EXPECT_THROW(counterexample_family(3), InvalidInput);
  EXPECT_THROW(parity_test_error(0), InvalidInput);
  const auto p = DiscreteDistribution::explicit_probabilities({0.5, 0.5});
  const auto q = DiscreteDistribution::explicit_probabilities({0.2, 0.3, 0.5});
  EXPECT_THROW(one_norm(p, q), InvalidInput);
}
