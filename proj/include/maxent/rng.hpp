#pragma once

#include <cstdint>
#include <random>

namespace maxent {

/// Reproducible random stream.
///
/// The engine is std::mt19937_64 (its output sequence is fixed by the C++
/// standard). The engine seed is splitmix64(seed ^ splitmix64(stream)), so
/// (seed, stream) pairs give independent sub-streams, one per chain or
/// worker. Conversions to doubles are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal via Box-Muller (cosine branch only).
  double normal();
  /// Standard exponential by inversion.
  double exponential();

  /// Independent child stream identified by `stream` under the same seed.
  RngStream substream(std::uint64_t stream) const { return RngStream(seed_, stream); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace maxent
