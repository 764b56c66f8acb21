#include "latentdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latentdyn/error.hpp"
#include "latentdyn/rng.hpp"

namespace latentdyn {

std::string_view operator_kind_name(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::AffineContraction: return "affine_contraction";
    case OperatorKind::ResidualMlp: return "residual_mlp";
    case OperatorKind::CustomTable: return "custom_table";
  }
  return "unknown";
}

OperatorKind parse_operator_kind(std::string_view name) {
  if (name == "affine_contraction") return OperatorKind::AffineContraction;
  if (name == "residual_mlp") return OperatorKind::ResidualMlp;
  if (name == "custom_table") return OperatorKind::CustomTable;
  fail(ErrorCode::ParseFailure, "unknown operator kind '" + std::string(name) + "'");
}

namespace {

void check_noise(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::Precondition, "noise_sigma must be finite and >= 0");
}

void check_dim(std::span<const double> a, std::size_t dim) {
  if (a.size() != dim) {
    fail(ErrorCode::DimensionMismatch,
         "state of length " + std::to_string(a.size()) + " for operator of dim " + std::to_string(dim));
  }
}

struct Apply {
  std::span<const double> a;

  std::vector<double> operator()(const AffineParams& p) const {
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = p.center[j] + p.rate * (a[j] - p.center[j]);
    return out;
  }

  std::vector<double> operator()(const ResidualMlpParams& p) const {
    auto hidden = p.w1.apply(a);
    for (auto& h : hidden) h = std::tanh(h);
    auto out = p.w2.apply(hidden);
    for (std::size_t j = 0; j < a.size(); ++j) out[j] += a[j] + p.bias[j];
    return out;
  }

  std::vector<double> operator()(const CustomTableParams& p) const {
    const std::size_t d = a.size();
    std::vector<std::size_t> lower(d);
    std::vector<double> frac(d);
    std::vector<std::size_t> stride(d);
    std::size_t s = 1;
    for (std::size_t k = d; k-- > 0;) {
      stride[k] = s;
      s *= p.axes[k].size();
    }
    for (std::size_t k = 0; k < d; ++k) {
      const auto& ax = p.axes[k];
      const double x = std::clamp(a[k], ax.front(), ax.back());
      auto it = std::upper_bound(ax.begin(), ax.end(), x);
      std::size_t hi = static_cast<std::size_t>(it - ax.begin());
      hi = std::clamp<std::size_t>(hi, 1, ax.size() - 1);
      lower[k] = hi - 1;
      frac[k] = (x - ax[hi - 1]) / (ax[hi] - ax[hi - 1]);
    }
    std::vector<double> out(d, 0.0);
    const std::size_t corners = std::size_t{1} << d;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      double w = 1.0;
      std::size_t node = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const bool up = (mask >> k) & 1U;
        w *= up ? frac[k] : 1.0 - frac[k];
        node += (lower[k] + (up ? 1 : 0)) * stride[k];
      }
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) out[j] += w * p.values[node * d + j];
    }
    return out;
  }
};

}  // namespace

UpdateOperator::UpdateOperator(std::variant<AffineParams, ResidualMlpParams, CustomTableParams> params,
                               std::size_t dim, double noise_sigma)
    : params_(std::move(params)), dim_(dim), noise_sigma_(noise_sigma) {}

UpdateOperator UpdateOperator::affine(std::vector<double> center, double rate, double noise_sigma) {
  check_noise(noise_sigma);
  if (center.empty()) fail(ErrorCode::Precondition, "affine operator needs a nonempty center");
  if (!(rate >= 0.0) || !std::isfinite(rate)) fail(ErrorCode::Precondition, "rate must be finite and >= 0");
  const std::size_t d = center.size();
  return UpdateOperator(AffineParams{std::move(center), rate}, d, noise_sigma);
}

UpdateOperator UpdateOperator::residual_mlp(Matrix w1, Matrix w2, std::vector<double> bias, double noise_sigma) {
  check_noise(noise_sigma);
  const std::size_t d = bias.size();
  if (d == 0) fail(ErrorCode::Precondition, "residual_mlp needs a nonempty bias");
  if (w1.cols() != d || w2.rows() != d || w1.rows() != w2.cols() || w1.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, "residual_mlp shapes: W1 " + std::to_string(w1.rows()) + "x" +
                                           std::to_string(w1.cols()) + ", W2 " + std::to_string(w2.rows()) + "x" +
                                           std::to_string(w2.cols()) + ", bias " + std::to_string(d));
  }
  return UpdateOperator(ResidualMlpParams{std::move(w1), std::move(w2), std::move(bias)}, d, noise_sigma);
}

UpdateOperator UpdateOperator::custom_table(std::vector<std::vector<double>> axes, std::vector<double> values,
                                            double noise_sigma) {
  check_noise(noise_sigma);
  const std::size_t d = axes.size();
  if (d == 0 || d > 16) fail(ErrorCode::Precondition, "custom_table supports 1..16 dimensions");
  std::size_t nodes = 1;
  for (std::size_t k = 0; k < d; ++k) {
    const auto& ax = axes[k];
    if (ax.size() < 2) fail(ErrorCode::Precondition, "custom_table axis " + std::to_string(k) + " needs >= 2 nodes");
    for (std::size_t i = 1; i < ax.size(); ++i) {
      if (!(ax[i] > ax[i - 1])) {
        fail(ErrorCode::Precondition, "custom_table axis " + std::to_string(k) + " is not strictly increasing");
      }
    }
    nodes *= ax.size();
  }
  if (values.size() != nodes * d) {
    fail(ErrorCode::DimensionMismatch, "custom_table expects " + std::to_string(nodes * d) + " values, got " +
                                           std::to_string(values.size()));
  }
  return UpdateOperator(CustomTableParams{std::move(axes), std::move(values)}, d, noise_sigma);
}

OperatorKind UpdateOperator::kind() const noexcept {
  switch (params_.index()) {
    case 0: return OperatorKind::AffineContraction;
    case 1: return OperatorKind::ResidualMlp;
    default: return OperatorKind::CustomTable;
  }
}

std::vector<double> UpdateOperator::apply(std::span<const double> a) const {
  check_dim(a, dim_);
  return std::visit(Apply{a}, params_);
}

UpdateOperator UpdateOperator::deterministic() const { return UpdateOperator(params_, dim_, 0.0); }

namespace {

void guard_divergence(std::span<const double> a, std::size_t step) {
  const double n = norm2(a);
  if (!std::isfinite(n) || n > kDivergenceNorm) {
    fail(ErrorCode::Divergence, "state norm exceeded 1e12 at step " + std::to_string(step));
  }
}

}  // namespace

FixedPointResult iterate(const UpdateOperator& op, std::span<const double> a0, std::size_t max_iters, double tol,
                         bool record_orbit) {
  if (!(tol > 0.0)) fail(ErrorCode::Precondition, "tolerance must be positive");
  if (op.noise_sigma() != 0.0) fail(ErrorCode::Precondition, "fixed-point iteration requires noise_sigma = 0");
  check_dim(a0, op.dim());

  FixedPointResult r;
  r.point.assign(a0.begin(), a0.end());
  if (record_orbit) r.orbit.append_row(r.point);

  double prev_step = 0.0;
  double max_ratio = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    auto next = op.apply(r.point);
    guard_divergence(next, it);
    const double step = distance(next, r.point);
    if (prev_step > 0.0) max_ratio = std::max(max_ratio, step / prev_step);
    prev_step = step;
    r.point = std::move(next);
    r.iterations = it;
    r.final_step_norm = step;
    if (record_orbit) r.orbit.append_row(r.point);
    if (step <= tol) {
      r.converged = true;
      break;
    }
  }

  if (const auto* affine = std::get_if<AffineParams>(&op.params())) {
    r.lipschitz_estimate = affine->rate;
    r.non_contractive = affine->rate >= 1.0;
  } else {
    r.lipschitz_estimate = max_ratio;
    r.non_contractive = max_ratio >= 1.0;
  }
  return r;
}

double estimate_lipschitz(const VectorMap& f, std::span<const double> center, double radius, std::size_t samples,
                          std::uint64_t seed) {
  if (samples < 2) fail(ErrorCode::Precondition, "Lipschitz estimate needs at least 2 samples");
  if (!(radius > 0.0)) fail(ErrorCode::Precondition, "Lipschitz region radius must be positive");
  const std::size_t d = center.size();
  constexpr double kPartnerOffset = 1e-3;

  Rng rng(seed);
  std::vector<std::vector<double>> xs;
  xs.reserve(2 * samples);
  for (std::size_t i = 0; i < samples; ++i) {
    auto dir = rng.unit_vector(d);
    const double r = (1.0 - kPartnerOffset) * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    auto partner_dir = rng.unit_vector(d);
    std::vector<double> x(d), y(d);
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = center[j] + radius * (r * dir[j]);
      y[j] = center[j] + radius * (r * dir[j] + kPartnerOffset * partner_dir[j]);
    }
    xs.push_back(std::move(x));
    xs.push_back(std::move(y));
  }

  std::vector<std::vector<double>> fx;
  fx.reserve(xs.size());
  for (const auto& x : xs) fx.push_back(f(x));

  double best = 0.0;
  auto consider = [&](std::size_t a, std::size_t b) {
    const double dx = distance(xs[a], xs[b]);
    if (dx > 0.0) best = std::max(best, distance(fx[a], fx[b]) / dx);
  };
  for (std::size_t i = 0; i < samples; ++i) {
    consider(2 * i, 2 * i + 1);
    for (std::size_t j = i + 1; j < samples; ++j) consider(2 * i, 2 * j);
  }
  return best;
}

double estimate_lipschitz(const UpdateOperator& op, std::span<const double> center, double radius,
                          std::size_t samples, std::uint64_t seed) {
  check_dim(center, op.dim());
  const auto det = op.deterministic();
  return estimate_lipschitz([&det](std::span<const double> a) { return det.apply(a); }, center, radius, samples,
                            seed);
}

Trajectory simulate_noisy(const UpdateOperator& op, std::span<const double> a0, std::size_t steps,
                          std::uint64_t seed) {
  if (steps < 2) fail(ErrorCode::Precondition, "simulation needs steps >= 2, got " + std::to_string(steps));
  check_dim(a0, op.dim());
  const std::size_t d = op.dim();
  const double sigma = op.noise_sigma();

  Rng rng(seed);
  std::vector<double> data;
  data.reserve(steps * d);
  std::vector<double> a(a0.begin(), a0.end());
  for (std::size_t n = 1; n <= steps; ++n) {
    auto next = op.apply(a);
    if (sigma > 0.0) {
      for (auto& x : next) x += sigma * rng.normal();
    }
    guard_divergence(next, n);
    data.insert(data.end(), next.begin(), next.end());
    a = std::move(next);
  }
  return Trajectory(steps, d, std::move(data));
}

}  // namespace latentdyn
