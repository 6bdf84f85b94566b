#pragma once

#include <cstdint>
#include <random>

namespace redq {

// Named random streams. A replication derives one independent generator per
// (kind, index) pair so that, e.g., changing the request degree never
// perturbs the arrival sample path.
enum class Stream : std::uint64_t {
  kArrivals = 1,
  kService = 2,
  kRemoval = 3,
  kEligibility = 4,
  kDispatch = 5,
  kReplay = 6,
  kMonteCarlo = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream (kind, index) of replication `replication` under `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t replication,
                                    Stream kind, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return splitmix64(h ^ index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

inline Rng make_stream(std::uint64_t root, std::uint64_t replication, Stream kind,
                       std::uint64_t index = 0) {
  return Rng(derive_seed(root, replication, kind, index));
}

}  // namespace redq
