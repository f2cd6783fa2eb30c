#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace dht {

/// One Philox4x32-10 block: ten rounds over (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The stream is a pure function of (key, counter), so a 64-bit seed fully
/// determines every draw on every platform. Uniform doubles use the top 53
/// bits of a 64-bit word; normals use Box-Muller on those uniforms, never the
/// implementation-defined std:: distributions.
class CounterRng {
 public:
  static constexpr std::string_view kName = "philox4x32-10";
  static constexpr int kVersion = 1;

  explicit CounterRng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept;
  double normal() noexcept;
  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Index drawn from a cumulative distribution (last entry ~ 1).
  std::size_t categorical(std::span<const double> cdf) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Bijective 64-bit finalizer (SplitMix64 mixing function).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Substream seed for (master, domain, index).
///
/// Stable across versions: mix64(mix64(master + domain * golden) ^ index).
/// For fixed (master, domain) the map index -> seed is a bijection, so
/// distinct indices never collide.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master + domain * 0x9e3779b97f4a7c15ULL) ^ index);
}

// Domain tags used across the library.
namespace seed_domain {
inline constexpr std::uint64_t kTrial = 1;
inline constexpr std::uint64_t kCodeword = 2;
inline constexpr std::uint64_t kBin = 3;
inline constexpr std::uint64_t kCodebook = 4;
inline constexpr std::uint64_t kSpectrum = 5;
}  // namespace seed_domain

}  // namespace dht
