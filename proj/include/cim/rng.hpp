#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

#include <boost/random/normal_distribution.hpp>

namespace cim {

/// Reproducible random stream keyed by (master seed, trajectory, label).
///
/// The generator is xoshiro256++ seeded through splitmix64 from a hash of
/// the key triple, so streams for different trajectories or noise channels
/// never share state and the same key always replays the same sequence.
/// Satisfies UniformRandomBitGenerator so it plugs into <random> and
/// Boost.Random distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index,
            std::string_view stream_label);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Standard normal draw (ziggurat).
  double normal() {
    boost::random::normal_distribution<double> dist;
    return dist(*this);
  }

  /// Uniform draw on [0, 1).
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

RngStream derive_stream(std::uint64_t master_seed,
                        std::uint64_t trajectory_index,
                        std::string_view stream_label);

}  // namespace cim
