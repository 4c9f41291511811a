#ifndef QCONC_CIRCUITSIM_HPP
#define QCONC_CIRCUITSIM_HPP

// Exact simulation of a single layer of RX rotations acting on |0...0>.
//
// Two independent routes are provided: ProductRxState keeps one amplitude
// pair per qubit and evaluates everything in O(n); DenseState holds the full
// 2^n amplitude vector, applies gates one at a time and serves as the oracle.

#include <qconc/error.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qconc {

using complex = std::complex<double>;

/// Bit set over qubits; bit i set means Pauli-Z acts on qubit i (0-based).
using QubitMask = std::uint64_t;

inline constexpr std::size_t kMaxMaskQubits = 64;
inline constexpr std::size_t kMaxDenseQubits = 24;

/// exp(-i theta X / 2) or exp(-i theta X).
enum class RotationConvention { half_angle, full_angle };

inline const char* to_string(RotationConvention c) {
  return c == RotationConvention::half_angle ? "half_angle" : "full_angle";
}

/// Rotation angle actually applied by the gate exp(-i phi X / 2).
inline double effective_half_angle(double theta, RotationConvention conv) {
  return conv == RotationConvention::half_angle ? theta : 2.0 * theta;
}

/// One rotation angle per qubit, in radians.
class Angles {
 public:
  Angles() = default;
  explicit Angles(std::vector<double> values) : values_(std::move(values)) { validate(); }
  Angles(std::initializer_list<double> values) : values_(values) { validate(); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  /// Copy with component k shifted by delta.
  Angles shifted(std::size_t k, double delta) const {
    Angles out = *this;
    out.values_.at(k) += delta;
    out.validate();
    return out;
  }

  bool operator==(const Angles&) const = default;

 private:
  void validate() const {
    detail::require(!values_.empty(), "angles: at least one parameter required");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      detail::require(std::isfinite(values_[i]),
                      "angles: component " + std::to_string(i) + " is not finite");
    }
  }

  std::vector<double> values_;
};

/// Amplitudes (a, b) of a|0> + b|1> for one qubit.
struct QubitAmplitudes {
  complex zero;
  complex one;
};

/// Tensor product of single-qubit states, qubit 0 first.
class ProductRxState {
 public:
  explicit ProductRxState(std::vector<QubitAmplitudes> qubits) : qubits_(std::move(qubits)) {
    detail::require(!qubits_.empty(), "product state: no qubits");
    for (const auto& q : qubits_) {
      double norm = std::norm(q.zero) + std::norm(q.one);
      detail::require(std::abs(norm - 1.0) <= 1e-12, "product state: qubit not normalised");
    }
  }

  std::size_t num_qubits() const noexcept { return qubits_.size(); }
  const QubitAmplitudes& qubit(std::size_t i) const { return qubits_.at(i); }
  std::span<const QubitAmplitudes> qubits() const noexcept { return qubits_; }

 private:
  std::vector<QubitAmplitudes> qubits_;
};

/// Full amplitude vector. Basis index bit i is the value of qubit i.
class DenseState {
 public:
  /// |0...0> on n qubits.
  static DenseState zero(std::size_t num_qubits) {
    guard(num_qubits);
    std::vector<complex> amps(std::size_t{1} << num_qubits, complex{0.0, 0.0});
    amps[0] = 1.0;
    return DenseState(num_qubits, std::move(amps));
  }

  DenseState(std::size_t num_qubits, std::vector<complex> amplitudes)
      : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    guard(num_qubits_);
    detail::require(amps_.size() == (std::size_t{1} << num_qubits_),
                    "dense state: amplitude count must be 2^n");
  }

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::span<const complex> amplitudes() const noexcept { return amps_; }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  /// Applies the 2x2 matrix [[m00, m01], [m10, m11]] to one qubit.
  void apply_single_qubit(std::size_t qubit, complex m00, complex m01, complex m10,
                          complex m11) {
    detail::require(qubit < num_qubits_, "dense state: qubit out of range");
    const std::size_t stride = std::size_t{1} << qubit;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        complex& lo = amps_[base + off];
        complex& hi = amps_[base + off + stride];
        const complex a0 = lo;
        const complex a1 = hi;
        lo = m00 * a0 + m01 * a1;
        hi = m10 * a0 + m11 * a1;
      }
    }
  }

  /// RX(theta) under the given convention; inverse applies the adjoint.
  void apply_rx(std::size_t qubit, double theta, RotationConvention conv, bool inverse = false) {
    const double half = 0.5 * effective_half_angle(theta, conv);
    const complex c{std::cos(half), 0.0};
    const complex s{0.0, (inverse ? 1.0 : -1.0) * std::sin(half)};
    apply_single_qubit(qubit, c, s, s, c);
  }

  /// <psi| Z_mask |psi> by explicit diagonal operator application.
  double z_parity_expectation(QubitMask mask) const {
    check_mask(mask);
    double e = 0.0;
    for (std::size_t b = 0; b < amps_.size(); ++b) {
      const int parity = std::popcount(static_cast<QubitMask>(b) & mask) & 1;
      e += (parity ? -1.0 : 1.0) * std::norm(amps_[b]);
    }
    return e;
  }

  /// <psi| X_q |psi> by explicit bit-flip operator application.
  double x_expectation(std::size_t qubit) const {
    detail::require(qubit < num_qubits_, "dense state: qubit out of range");
    const std::size_t flip = std::size_t{1} << qubit;
    complex e{0.0, 0.0};
    for (std::size_t b = 0; b < amps_.size(); ++b) e += std::conj(amps_[b]) * amps_[b ^ flip];
    return e.real();
  }

  /// Probability of reading b in the computational basis.
  double probability(std::size_t basis_index) const { return std::norm(amps_.at(basis_index)); }

 private:
  static void guard(std::size_t num_qubits) {
    detail::require(num_qubits >= 1, "dense state: no qubits");
    if (num_qubits > kMaxDenseQubits) {
      throw ResourceGuard("dense state: " + std::to_string(num_qubits) +
                          " qubits exceeds the cap of " + std::to_string(kMaxDenseQubits));
    }
  }

  void check_mask(QubitMask mask) const {
    detail::require(num_qubits_ >= kMaxMaskQubits || (mask >> num_qubits_) == 0,
                    "dense state: mask references a qubit out of range");
  }

  std::size_t num_qubits_;
  std::vector<complex> amps_;
};

/// c * Z_mask
struct PauliZTerm {
  double coefficient = 1.0;
  QubitMask mask = 0;
};

/// Weighted sum of Z-parity terms.
class Observable {
 public:
  explicit Observable(std::vector<PauliZTerm> terms) : terms_(std::move(terms)) {
    detail::require(!terms_.empty(), "observable: at least one term required");
    for (const auto& t : terms_) {
      detail::require(std::isfinite(t.coefficient), "observable: coefficient not finite");
    }
  }

  /// Z on every qubit.
  static Observable global_z(std::size_t n) { return Observable({{1.0, prefix_mask(n)}}); }

  /// c1 Z_{1..n} + c2 Z_{1..n-1} + c3 Z_{1..n-2} + c4 Z_{1..n-3}.
  static Observable cvar_hamiltonian(std::size_t n, std::span<const double> c) {
    detail::require(c.size() == 4, "cvar hamiltonian: exactly four coefficients required");
    detail::require(n >= 4, "cvar hamiltonian: needs at least four qubits");
    std::vector<PauliZTerm> terms;
    for (std::size_t j = 0; j < 4; ++j) terms.push_back({c[j], prefix_mask(n - j)});
    return Observable(std::move(terms));
  }

  /// Mask with bits 0..k-1 set.
  static QubitMask prefix_mask(std::size_t k) {
    detail::require(k <= kMaxMaskQubits, "mask: more than 64 qubits");
    return k == kMaxMaskQubits ? ~QubitMask{0} : (QubitMask{1} << k) - 1;
  }

  std::span<const PauliZTerm> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  double abs_coefficient_sum() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coefficient);
    return s;
  }

  double squared_coefficient_sum() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coefficient * t.coefficient;
    return s;
  }

  /// Highest qubit index referenced plus one.
  std::size_t min_qubits() const {
    QubitMask all = 0;
    for (const auto& t : terms_) all |= t.mask;
    return static_cast<std::size_t>(std::bit_width(all));
  }

 private:
  std::vector<PauliZTerm> terms_;
};

/// RX layer applied to |0...0>.
inline ProductRxState prepare_rx_layer(const Angles& theta,
                                       RotationConvention conv = RotationConvention::half_angle) {
  std::vector<QubitAmplitudes> qubits;
  qubits.reserve(theta.size());
  for (double t : theta.values()) {
    const double half = 0.5 * effective_half_angle(t, conv);
    qubits.push_back({complex{std::cos(half), 0.0}, complex{0.0, -std::sin(half)}});
  }
  return ProductRxState(std::move(qubits));
}

/// Expands a product state into its 2^n amplitudes.
inline DenseState to_dense(const ProductRxState& state) {
  const std::size_t n = state.num_qubits();
  if (n > kMaxDenseQubits) {
    throw ResourceGuard("to_dense: " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(kMaxDenseQubits));
  }
  std::vector<complex> amps(std::size_t{1} << n);
  for (std::size_t b = 0; b < amps.size(); ++b) {
    complex a{1.0, 0.0};
    for (std::size_t q = 0; q < n; ++q) {
      const auto& qa = state.qubit(q);
      a *= ((b >> q) & 1U) ? qa.one : qa.zero;
    }
    amps[b] = a;
  }
  return DenseState(n, std::move(amps));
}

namespace detail {

inline void check_mask_range(QubitMask mask, std::size_t n) {
  require(n >= kMaxMaskQubits || (mask >> n) == 0, "mask references a qubit out of range");
}

inline double single_qubit_z(double theta, RotationConvention conv) {
  return std::cos(effective_half_angle(theta, conv));
}

}  // namespace detail

/// Product of <Z_i> over the qubits in mask.
inline double z_parity_expectation(const ProductRxState& state, QubitMask mask) {
  detail::check_mask_range(mask, state.num_qubits());
  double e = 1.0;
  for (std::size_t q = 0; q < state.num_qubits() && q < kMaxMaskQubits; ++q) {
    if ((mask >> q) & 1U) {
      const auto& qa = state.qubit(q);
      e *= std::norm(qa.zero) - std::norm(qa.one);
    }
  }
  return e;
}

/// Same as z_parity_expectation(prepare_rx_layer(theta, conv), mask) without
/// materialising the state.
inline double z_parity_expectation(const Angles& theta, QubitMask mask, RotationConvention conv) {
  detail::check_mask_range(mask, theta.size());
  double e = 1.0;
  for (std::size_t q = 0; q < theta.size() && q < kMaxMaskQubits; ++q) {
    if ((mask >> q) & 1U) e *= detail::single_qubit_z(theta[q], conv);
  }
  return e;
}

/// Tr[H rho(theta)].
inline double loss_exact(const Angles& theta, const Observable& obs,
                         RotationConvention conv = RotationConvention::half_angle) {
  double loss = 0.0;
  for (const auto& term : obs.terms()) {
    loss += term.coefficient * z_parity_expectation(theta, term.mask, conv);
  }
  return loss;
}

inline double x_expectation(const ProductRxState& state, std::size_t qubit) {
  detail::require(qubit < state.num_qubits(), "x_expectation: qubit out of range");
  const auto& qa = state.qubit(qubit);
  return 2.0 * (std::conj(qa.zero) * qa.one).real();
}

/// Probability of the all-zero outcome of U^dagger(x2) U(x) |0>.
inline double fidelity_kernel_probability(const Angles& x, const Angles& x2,
                                          RotationConvention conv = RotationConvention::half_angle) {
  detail::require(x.size() == x2.size(), "fidelity kernel: length mismatch");
  const auto s = prepare_rx_layer(x, conv);
  const auto s2 = prepare_rx_layer(x2, conv);
  double p = 1.0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    const auto& a = s.qubit(q);
    const auto& b = s2.qubit(q);
    p *= std::norm(std::conj(b.zero) * a.zero + std::conj(b.one) * a.one);
  }
  return p;
}

}  // namespace qconc

#endif  // QCONC_CIRCUITSIM_HPP
