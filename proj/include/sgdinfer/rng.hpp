#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sgdinfer {

/// Reproducible 64-bit random stream keyed by (master_seed, stream_index).
///
/// The key is hashed with SplitMix64 and expanded into a xoshiro256** state,
/// so streams with distinct indices start from unrelated states. Satisfies
/// UniformRandomBitGenerator and can be handed to <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Child stream keyed by this stream's identity and `child_index`.
  /// Does not advance this stream.
  [[nodiscard]] RngStream split(std::uint64_t child_index) const;

  /// Child stream seeded from the next draw of this stream (advances it).
  [[nodiscard]] RngStream fork();

  /// Uniform index in [0, n).
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t key_;
  std::array<std::uint64_t, 4> state_{};
};

/// SplitMix64 finalizer; also used to derive per-simulation seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace sgdinfer
