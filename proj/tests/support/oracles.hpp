#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "latentdyn/decision.hpp"
#include "latentdyn/rng.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Classical Jacobi with largest off-diagonal pivot. Eigenvalues descending.
std::vector<double> jacobi_eigenvalues(Dense a, double tol = 1e-15);

/// O(n^2) DFT, twiddles from std::polar.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x);

/// One-sided Welch density built from naive_dft.
std::vector<double> welch_naive(const std::vector<double>& x, std::size_t len, double overlap, bool hann);

double brute_action_risk(const latentdyn::EnvironmentModel& m, std::size_t a, std::size_t x, std::size_t e,
                         bool use_max);

struct BruteBest {
  double risk;
  std::vector<std::size_t> choice;
};
/// Minimum risk over every deterministic policy.
BruteBest brute_best_deterministic(const latentdyn::EnvironmentModel& m, bool use_max);

double brute_policy_risk(const latentdyn::EnvironmentModel& m, const latentdyn::Policy& p, bool use_max);

/// Random valid model; probabilities from normalized uniforms.
latentdyn::EnvironmentModel random_model(latentdyn::Rng& rng, std::size_t nx, std::size_t ne, std::size_t na,
                                         std::size_t ny);

latentdyn::Policy random_policy(latentdyn::Rng& rng, std::size_t nx, std::size_t ne, std::size_t na);

/// Exponents of 2, 3, 5, ... by trial division; stops at the first prime not dividing n.
std::vector<unsigned> prime_exponents(std::uint64_t n, std::uint64_t* rest = nullptr);

std::uint64_t nth_prime(std::size_t i);

}  // namespace oracle
