#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lsaboot {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output block i is a pure function of (key, counter = i).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// A reproducible random stream keyed by (seed, stream_id).
///
/// The 64-bit seed and 64-bit stream id form the Philox key/counter high
/// words, so two streams with different ids never share a counter block.
/// Models UniformRandomBitGenerator, so Boost.Random distributions can
/// consume it directly. Not thread-safe; one stream per thread.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1); never returns 0.
  double uniform_open() noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal();
  double exponential();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter buffer_{};
  unsigned next_ = 4;
};

/// SplitMix64 finalizer; used to derive child seeds from (seed, tag) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace lsaboot
