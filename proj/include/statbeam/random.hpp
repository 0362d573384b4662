#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace statbeam {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Stateless: the output block is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Stream families, so independent consumers of one seed never overlap.
enum class StreamPurpose : std::uint32_t {
  channel = 1,
  direction = 2,
  magnitude = 3,
  fixture = 4,
  restart = 5,
};

constexpr std::uint32_t stream_id(StreamPurpose purpose, std::uint32_t index) {
  return (static_cast<std::uint32_t>(purpose) << 24) ^ (index & 0x00FFFFFFu);
}

/// Seeded random stream addressed by (seed, stream, position).
///
/// Each position (e.g. a Monte Carlo sample index) owns an independent
/// sequence of draws, so results do not depend on how positions are spread
/// across threads. Within a position, draws advance an internal counter.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t position = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        position_(position) {}

  /// Uniform on (0, 1], 53 random bits.
  double uniform() {
    if (cursor_ >= 2) refill();
    const std::uint64_t bits =
        (std::uint64_t{block_[2 * cursor_]} << 32) | std::uint64_t{block_[2 * cursor_ + 1]};
    ++cursor_;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard circularly-symmetric complex Gaussian CN(0, 1): real and
  /// imaginary parts i.i.d. N(0, 1/2). Box-Muller on two uniforms.
  std::complex<double> complex_normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// Standard real normal N(0, 1).
  double normal() { return std::sqrt(2.0) * complex_normal().real(); }

  [[nodiscard]] std::uint64_t position() const noexcept { return position_; }
  [[nodiscard]] std::uint32_t draws() const noexcept { return draw_; }

 private:
  void refill() {
    block_ = Philox4x32::generate({draw_, static_cast<std::uint32_t>(position_),
                                   static_cast<std::uint32_t>(position_ >> 32), stream_},
                                  key_);
    ++draw_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_;
  std::uint64_t position_;
  std::uint32_t draw_ = 0;
  Philox4x32::Counter block_{};
  int cursor_ = 2;
};

}  // namespace statbeam
