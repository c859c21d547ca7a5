#pragma once

#include <cstdint>

namespace rcheb {

namespace detail {

/// SplitMix64 finalizer. Good avalanche; the standard choice for keyed counters.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Counter-based generator: output i of a stream is mix64(key + (i+1)*gamma),
/// so (seed, stream, draw, call index) fully determines every value. Streams
/// and per-draw substreams are derived by re-keying, never by skipping, which
/// keeps results independent of how work is partitioned across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                           (stream + detail::kGolden))) {}

  /// Substream for one Monte Carlo draw: deterministic in (seed, stream, draw).
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) noexcept
      : RngStream(seed, stream) {
    key_ = detail::mix64(key_ ^ (detail::mix64(draw + 1) + detail::kGolden));
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_u01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double next_u01_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rcheb
