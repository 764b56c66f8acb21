#pragma once

#include <cstdint>
#include <vector>

namespace latentdyn {

/// splitmix64 finalizer; used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Deterministic xoshiro256** generator with its own uniform and Gaussian
/// transforms, so streams are identical across standard library vendors.
///
/// Child streams are derived with split(): the parent seed and the stream id
/// are mixed through splitmix64, so sibling streams never share state.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }
  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  std::vector<double> normal_vector(std::size_t n);
  /// Uniform direction on the unit sphere in R^n.
  std::vector<double> unit_vector(std::size_t n);

  Rng split(std::uint64_t stream) const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace latentdyn
