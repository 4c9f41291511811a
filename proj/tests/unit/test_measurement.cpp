#include "oracles.hpp"

#include <qconc/measurement.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace qconc;

TEST(Measurement, DistributionValidation) {
  EXPECT_THROW(OutcomeDistribution({1.0, -1.0}, {0.7, 0.7}), InvalidInput);
  EXPECT_THROW(OutcomeDistribution({1.0, -1.0}, {1.2, -0.2}), InvalidInput);
  EXPECT_THROW(OutcomeDistribution({1.0}, {0.5, 0.5}), InvalidInput);
  // Rounding noise below 1e-12 is clamped.
  const OutcomeDistribution d({1.0, -1.0}, {1.0 + 1e-13, -1e-13});
  EXPECT_EQ(d.probability(1), 0.0);
}

TEST(Measurement, PovmNeedsDistinctLabels) {
  EXPECT_THROW(PovmSpec("p", {1.0}, [](const Angles&) { return std::vector<double>{1.0}; }), InvalidInput);
  EXPECT_THROW(PovmSpec("p", {1.0, 1.0}, [](const Angles&) { return std::vector<double>{0.5, 0.5}; }),
               InvalidInput);
}

TEST(Measurement, SamplingIsDeterministicPerStream) {
  const OutcomeDistribution d({-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3});
  RngStream a(42, 7);
  RngStream b(42, 7);
  RngStream c(42, 8);
  const auto sa = sample(d, 1000, a);
  EXPECT_EQ(sa, sample(d, 1000, b));
  EXPECT_NE(sa, sample(d, 1000, c));
  EXPECT_EQ(sa.shots(), 1000u);
}

TEST(Measurement, DegenerateDistributionsAreExact) {
  RngStream rng(1, 1);
  const auto s = sample(OutcomeDistribution({1.0, -1.0}, {1.0, 0.0}), 12345, rng);
  EXPECT_EQ(s.counts()[0], 12345u);
  EXPECT_EQ(s.counts()[1], 0u);
  const auto t = sample(OutcomeDistribution({1.0, -1.0, 3.0}, {0.0, 0.0, 1.0}), 7, rng);
  EXPECT_EQ(t.counts()[2], 7u);
}

TEST(Measurement, MultinomialCountsPassChiSquare) {
  // 16 outcomes, 10^6 shots: the chi-square statistic over 15 degrees of
  // freedom stays below the 0.999 quantile (37.70) for a correct sampler.
  std::vector<double> p(16);
  std::vector<double> labels(16);
  std::iota(labels.begin(), labels.end(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < 16; ++k) total += (p[k] = 1.0 + static_cast<double>(k % 5));
  for (double& x : p) x /= total;
  const OutcomeDistribution d(labels, p);
  RngStream rng(3, 0);
  const std::uint64_t shots = 1000000;
  const auto s = sample(d, shots, rng);
  double chi2 = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double e = p[k] * static_cast<double>(shots);
    chi2 += std::pow(static_cast<double>(s.counts()[k]) - e, 2) / e;
  }
  EXPECT_LT(chi2, 37.70);
}

TEST(Measurement, PauliTermPovmMatchesExpectation) {
  const Angles th{0.3, 2.2, 4.0};
  const auto povm = pauli_term_povm({1.0, 0b101});
  const auto d = povm.distribution(th);
  EXPECT_NEAR(d.mean(), std::cos(0.3) * std::cos(4.0), 1e-15);
  EXPECT_EQ(povm.cardinality(), 2u);
}

TEST(Measurement, XBasisPovmIsUniformOnRxLayer) {
  const auto d = x_basis_povm(1).distribution(Angles{0.4, 1.3});
  EXPECT_NEAR(d.probability(0), 0.5, 1e-15);
}

TEST(Measurement, FidelityKernelPovmMeanIsKernel) {
  const Angles x2{0.1, 0.2};
  const auto d = fidelity_kernel_povm(x2).distribution(Angles{0.5, 1.0});
  EXPECT_NEAR(d.mean(), fidelity_kernel_probability(Angles{0.5, 1.0}, x2), 1e-15);
}

TEST(Measurement, CvarPovmMatchesDiagonalOracle) {
  std::mt19937_64 gen(9);
  const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 4 + trial % 7;
    for (auto conv : {RotationConvention::half_angle, RotationConvention::full_angle}) {
      const auto raw = oracle::random_angles(gen, n);
      const auto spectrum = oracle::diagonal_spectrum(oracle::statevector(raw, conv), n, c);
      const auto povm = cvar_eigenvalue_povm(c, Angles(raw), conv);
      ASSERT_EQ(povm.distribution.size(), spectrum.size());
      std::size_t k = 0;
      for (const auto& [value, prob] : spectrum) {
        EXPECT_NEAR(povm.distribution.label(k), value, 1e-12);
        EXPECT_NEAR(povm.distribution.probability(k), prob, 1e-12);
        ++k;
      }
      EXPECT_TRUE(povm.warnings.empty());
    }
  }
}

TEST(Measurement, CvarPovmHasSixteenAscendingLabels) {
  const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
  const auto povm = cvar_eigenvalue_povm(c, Angles{0.0, 0.0, 0.0, 0.0});
  ASSERT_EQ(povm.spec.cardinality(), 16u);
  const auto labels = povm.spec.labels();
  EXPECT_TRUE(std::is_sorted(labels.begin(), labels.end()));
  EXPECT_DOUBLE_EQ(labels.front(), -1.875);
  EXPECT_DOUBLE_EQ(labels.back(), 1.875);
  // All qubits in |0>: every parity is +1.
  EXPECT_DOUBLE_EQ(povm.distribution.probability(15), 1.0);
}

TEST(Measurement, CvarPovmMergesDegenerateEigenvalues) {
  // Equal coefficients give eigenvalues in {-4, -2, 0, 2, 4}.
  const std::vector<double> c{1.0, 1.0, 1.0, 1.0};
  const auto povm = cvar_eigenvalue_povm(c, Angles{0.3, 0.9, 1.4, 2.0, 2.5});
  EXPECT_EQ(povm.spec.cardinality(), 5u);
  ASSERT_EQ(povm.warnings.size(), 1u);
  const auto spectrum = oracle::diagonal_spectrum(
      oracle::statevector({0.3, 0.9, 1.4, 2.0, 2.5}, RotationConvention::half_angle), 5, c);
  std::size_t k = 0;
  for (const auto& [value, prob] : spectrum) {
    EXPECT_NEAR(povm.distribution.label(k), value, 1e-12);
    EXPECT_NEAR(povm.distribution.probability(k), prob, 1e-12);
    ++k;
  }
}

TEST(Measurement, CvarPovmRejectsBadInput) {
  const std::vector<double> three{1.0, 0.5, 0.25};
  EXPECT_THROW(cvar_eigenvalue_povm(three, Angles{0.1, 0.2, 0.3, 0.4}), InvalidInput);
  const std::vector<double> c{1.0, 0.5, 0.25, 0.125};
  EXPECT_THROW(cvar_eigenvalue_povm(c, Angles{0.1, 0.2, 0.3}), InvalidInput);
  const std::vector<double> zero{0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(cvar_eigenvalue_povm(zero, Angles{0.1, 0.2, 0.3, 0.4}), InvalidInput);
}

TEST(Measurement, EmpiricalDistributionNormalises) {
  const SampleSet s({1.0, -1.0}, {3, 1});
  const auto d = empirical_distribution(s);
  EXPECT_DOUBLE_EQ(d.probability(0), 0.75);
  EXPECT_DOUBLE_EQ(d.mean(), 0.5);
}

TEST(Measurement, StreamsDeriveIndependently) {
  auto a = RngStream::derive(1, 2, 3, 4);
  auto b = RngStream::derive(1, 2, 3, 5);
  auto c = RngStream::derive(1, 2, 3, 4);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_EQ(x, c());
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += a.uniform01();
  EXPECT_NEAR(mean / 100000, 0.5, 0.005);
}
