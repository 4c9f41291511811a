#ifndef QCONC_RNG_HPP
#define QCONC_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace qconc {

/// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive hash of a sequence of words. Used to derive stream indices
/// as hash64({master_seed, trajectory_id, step, evaluation_id}).
constexpr std::uint64_t hash64(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

/// Counter-based random stream. The n-th output is a pure function of
/// (seed, index, n), so streams can be created anywhere without coordination
/// and replay identically.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
      : seed_(master_seed), index_(stream_index), key_(hash64({master_seed, stream_index})) {}

  /// Stream for one evaluation inside a trajectory.
  static RngStream derive(std::uint64_t master_seed, std::uint64_t trajectory_id,
                          std::uint64_t step, std::uint64_t evaluation_id) noexcept {
    return RngStream(master_seed, hash64({master_seed, trajectory_id, step, evaluation_id}));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qconc

#endif  // QCONC_RNG_HPP
