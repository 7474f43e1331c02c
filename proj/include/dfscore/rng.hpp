#pragma once

#include <cstdint>
#include <random>

namespace dfscore {

/// A single random stream. Draw sequences depend only on the seed and the
/// order of calls, so every task that needs randomness owns one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Derives a child seed from (base, a, b) by hashing the 24 little-endian
/// bytes with BLAKE2b and taking the first 8 bytes of the digest.
///
/// The harness uses (base seed, replication index, grid index); the finite
/// difference estimators use (stream seed, evaluation index, 0).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace dfscore
