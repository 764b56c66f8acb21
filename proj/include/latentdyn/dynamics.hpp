#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "latentdyn/linalg.hpp"
#include "latentdyn/trajectory.hpp"

namespace latentdyn {

enum class OperatorKind { AffineContraction, ResidualMlp, CustomTable };

std::string_view operator_kind_name(OperatorKind k) noexcept;
OperatorKind parse_operator_kind(std::string_view name);

/// F(a) = center + rate * (a - center)
struct AffineParams {
  std::vector<double> center;
  double rate = 0.0;
};

/// F(a) = a + w2 * tanh(w1 * a) + bias, with w1: h x d and w2: d x h.
struct ResidualMlpParams {
  Matrix w1;
  Matrix w2;
  std::vector<double> bias;
};

/// F sampled on a tensor grid and multilinearly interpolated; queries outside
/// the grid are clamped to its boundary. `values` holds one d-vector per node,
/// nodes enumerated with the last axis varying fastest.
struct CustomTableParams {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;
};

using VectorMap = std::function<std::vector<double>(std::span<const double>)>;

/// One step of the hidden-state recursion, A_{n+1} = F(A_n) + noise.
class UpdateOperator {
 public:
  static UpdateOperator affine(std::vector<double> center, double rate, double noise_sigma = 0.0);
  static UpdateOperator residual_mlp(Matrix w1, Matrix w2, std::vector<double> bias, double noise_sigma = 0.0);
  static UpdateOperator custom_table(std::vector<std::vector<double>> axes, std::vector<double> values,
                                     double noise_sigma = 0.0);

  OperatorKind kind() const noexcept;
  std::size_t dim() const noexcept { return dim_; }
  double noise_sigma() const noexcept { return noise_sigma_; }
  const std::variant<AffineParams, ResidualMlpParams, CustomTableParams>& params() const noexcept { return params_; }

  std::vector<double> apply(std::span<const double> a) const;
  std::vector<double> operator()(std::span<const double> a) const { return apply(a); }

  /// Same map without the noise term.
  UpdateOperator deterministic() const;

 private:
  UpdateOperator(std::variant<AffineParams, ResidualMlpParams, CustomTableParams> params, std::size_t dim,
                 double noise_sigma);

  std::variant<AffineParams, ResidualMlpParams, CustomTableParams> params_;
  std::size_t dim_ = 0;
  double noise_sigma_ = 0.0;
};

/// States whose norm exceeds this abort with Divergence.
inline constexpr double kDivergenceNorm = 1e12;

struct FixedPointResult {
  std::vector<double> point;
  std::size_t iterations = 0;
  double final_step_norm = 0.0;
  bool converged = false;
  /// Exact rate for affine operators; otherwise the largest ratio of
  /// successive step norms seen along the orbit.
  double lipschitz_estimate = 0.0;
  /// Set when the operator is known or observed not to contract.
  bool non_contractive = false;
  /// a_0, a_1, ... when recording was requested.
  Trajectory orbit;
};

/// Iterates a_{n+1} = F(a_n) until ||a_{n+1} - a_n|| <= tol or max_iters.
/// Requires a noise-free operator.
FixedPointResult iterate(const UpdateOperator& op, std::span<const double> a0, std::size_t max_iters, double tol,
                         bool record_orbit = false);

/// Largest ||F(x) - F(y)|| / ||x - y|| over sampled pairs in the ball.
///
/// Draws `samples` points uniformly from the ball; every pair is compared,
/// plus each point against a partner displaced by 1e-3 of the radius. The
/// point set depends only on (dim, radius-relative offsets, seed), so two
/// balls related by an affine map sample corresponding points.
double estimate_lipschitz(const VectorMap& f, std::span<const double> center, double radius, std::size_t samples,
                          std::uint64_t seed);
double estimate_lipschitz(const UpdateOperator& op, std::span<const double> center, double radius,
                          std::size_t samples, std::uint64_t seed);

/// a_{n+1} = F(a_n) + eps_n with eps_n ~ N(0, sigma^2 I). Rows are
/// a_1 .. a_steps; the start state is not emitted.
Trajectory simulate_noisy(const UpdateOperator& op, std::span<const double> a0, std::size_t steps,
                          std::uint64_t seed);

}  // namespace latentdyn
