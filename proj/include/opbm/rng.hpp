#pragma once

#include <cstdint>

namespace opbm::rng {

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds one word into a derivation key.
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t word) {
  return mix64(key ^ mix64(word + 0x517cc1b727220a95ULL));
}

/// Sub-stream domains; keep arrival sampling and policy randomness on
/// disjoint streams so every policy sees identical arrival sequences.
enum class Domain : std::uint64_t {
  arrivals = 1,
  policy = 2,
  generator = 3,
};

/// Counter-based deterministic random stream. Each logical draw consumes
/// exactly one counter tick regardless of internal rejection attempts, so
/// stream positions stay aligned with the consumer's step count.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  static Stream child(std::uint64_t master_seed, Domain domain, std::uint64_t index) {
    return Stream(derive(derive(mix64(master_seed), static_cast<std::uint64_t>(domain)), index));
  }

  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

  std::uint64_t next_u64() { return raw(counter_++, 0); }

  /// Unbiased uniform integer in [0, bound); bound >= 1. One counter tick.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t tick = counter_++;
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (std::uint64_t attempt = 0;; ++attempt) {
      std::uint64_t r = raw(tick, attempt);
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits. One counter tick.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t raw(std::uint64_t tick, std::uint64_t attempt) const {
    std::uint64_t h = key_;
    h = mix64(h ^ (tick + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (attempt + 0xbf58476d1ce4e5b9ULL));
    return h;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace opbm::rng
