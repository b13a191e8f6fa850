#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cdrp {

/// Names one random stream: a pure function of (master_seed, stream_id).
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// A stream id derived from this one; distinct indices give distinct streams.
  SeedSpec child(std::uint64_t index) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// The key comes from the master seed and the upper counter words hold the
/// stream id, so each SeedSpec addresses its own 2^64-block sequence.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  explicit Philox4x32(const SeedSpec& seed);

  std::uint64_t operator()();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  /// Jump to block `block` of this stream (each block yields two outputs).
  void seek(std::uint64_t block);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// A random stream with the few variates the samplers need. Gaussian
/// variates use Box-Muller on 53-bit uniforms so that a SeedSpec reproduces
/// bit-identical samples independent of the standard library.
class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed) : seed_(seed), engine_(seed) {}

  const SeedSpec& seed() const { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t bits() { return engine_(); }

 private:
  SeedSpec seed_;
  Philox4x32 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cdrp
