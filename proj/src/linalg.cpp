#include "latentdyn/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "latentdyn/error.hpp"

namespace latentdyn {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) fail(ErrorCode::DimensionMismatch, "ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) {
    fail(ErrorCode::DimensionMismatch,
         "matrix with " + std::to_string(cols_) + " columns applied to vector of length " + std::to_string(x.size()));
  }
  std::vector<double> y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> column_mean(const Trajectory& t) {
  std::vector<double> mean(t.dim(), 0.0);
  for (std::size_t n = 0; n < t.steps(); ++n) {
    const auto r = t.row(n);
    for (std::size_t j = 0; j < t.dim(); ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(t.steps());
  return mean;
}

Matrix covariance(const Trajectory& t, std::span<const double> mean) {
  const std::size_t d = t.dim();
  if (t.steps() < 2) fail(ErrorCode::Precondition, "covariance needs at least 2 steps");
  Matrix c(d, d);
  std::vector<double> centered(d);
  for (std::size_t n = 0; n < t.steps(); ++n) {
    const auto r = t.row(n);
    for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      auto out = c.row(i);
      for (std::size_t j = i; j < d; ++j) out[j] += ci * centered[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(t.steps() - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c(i, j) *= inv;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

namespace {

void orient(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (std::abs(v[j]) > std::abs(v[best])) best = j;
  if (v[best] < 0)
    for (auto& x : v) x = -x;
}

// Makes row r orthonormal to rows [0, r) of `c`; replaces it with a
// standard basis vector when it has no independent component left.
void orthonormalize_row(Matrix& c, std::size_t r) {
  const std::size_t d = c.cols();
  auto project_out = [&](std::span<double> v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < r; ++q) {
        const double p = dot(c.row(q), v);
        for (std::size_t j = 0; j < d; ++j) v[j] -= p * c(q, j);
      }
    }
  };
  auto v = c.row(r);
  project_out(v);
  double n = norm2(v);
  for (std::size_t basis = 0; n < 1e-8 && basis < d; ++basis) {
    std::fill(v.begin(), v.end(), 0.0);
    v[basis] = 1.0;
    project_out(v);
    n = norm2(v);
  }
  for (auto& x : v) x /= n;
}

}  // namespace

PcaModel fit_pca(const Trajectory& t, std::size_t k) {
  const std::size_t steps = t.steps();
  const std::size_t d = t.dim();
  if (steps < 2) fail(ErrorCode::Precondition, "PCA needs N >= 2, got " + std::to_string(steps));
  if (k < 1 || k > std::min(steps - 1, d)) {
    fail(ErrorCode::Precondition, "PCA rank k = " + std::to_string(k) + " outside [1, min(N-1, d)] = [1, " +
                                      std::to_string(std::min(steps - 1, d)) + "]");
  }

  PcaModel model;
  model.mean = column_mean(t);

  Trajectory centered = t;
  bool all_zero = true;
  for (std::size_t n = 0; n < steps; ++n) {
    auto r = centered.row(n);
    for (std::size_t j = 0; j < d; ++j) {
      r[j] -= model.mean[j];
      if (r[j] != 0.0) all_zero = false;
    }
  }
  if (all_zero) fail(ErrorCode::RankDeficient, "covariance is the zero matrix (all rows identical)");

  model.components = Matrix(k, d);
  model.eigenvalues.assign(k, 0.0);
  const double inv = 1.0 / static_cast<double>(steps - 1);

  if (steps < d) {
    Matrix gram(steps, steps);
    for (std::size_t a = 0; a < steps; ++a) {
      for (std::size_t b = a; b < steps; ++b) {
        gram(a, b) = dot(centered.row(a), centered.row(b)) * inv;
        gram(b, a) = gram(a, b);
      }
    }
    const auto eig = symmetric_eigen(gram);
    for (std::size_t c = 0; c < k; ++c) {
      model.eigenvalues[c] = eig.values[c];
      auto comp = model.components.row(c);
      for (std::size_t n = 0; n < steps; ++n) {
        const double u = eig.vectors(n, c);
        const auto r = centered.row(n);
        for (std::size_t j = 0; j < d; ++j) comp[j] += u * r[j];
      }
      const double scale = norm2(comp);
      if (eig.values[c] > 1e-12 * eig.values[0] && scale > 0.0) {
        for (auto& x : comp) x /= scale;
      }
      orthonormalize_row(model.components, c);
    }
  } else {
    const auto eig = symmetric_eigen(covariance(centered, std::vector<double>(d, 0.0)));
    for (std::size_t c = 0; c < k; ++c) {
      model.eigenvalues[c] = eig.values[c];
      for (std::size_t j = 0; j < d; ++j) model.components(c, j) = eig.vectors(j, c);
    }
  }

  for (std::size_t c = 0; c < k; ++c) {
    model.eigenvalues[c] = std::max(model.eigenvalues[c], 0.0);
    orient(model.components.row(c));
  }
  return model;
}

Trajectory project_onto(const PcaModel& m, const Trajectory& t, std::size_t axes) {
  if (t.dim() != m.mean.size()) {
    fail(ErrorCode::DimensionMismatch,
         "trajectory dim " + std::to_string(t.dim()) + " vs model dim " + std::to_string(m.mean.size()));
  }
  if (axes < 1 || axes > m.rank()) {
    fail(ErrorCode::Precondition, "requested " + std::to_string(axes) + " axes from a rank-" +
                                      std::to_string(m.rank()) + " model");
  }
  Trajectory out(t.steps(), axes);
  std::vector<double> centered(t.dim());
  for (std::size_t n = 0; n < t.steps(); ++n) {
    const auto r = t.row(n);
    for (std::size_t j = 0; j < t.dim(); ++j) centered[j] = r[j] - m.mean[j];
    for (std::size_t a = 0; a < axes; ++a) out(n, a) = dot(m.components.row(a), centered);
  }
  return out;
}

std::vector<Point2> project(const PcaModel& m, const Trajectory& t) {
  if (m.rank() < 2) fail(ErrorCode::Precondition, "2D projection needs a model with k >= 2");
  const auto scores = project_onto(m, t, 2);
  std::vector<Point2> z(t.steps());
  for (std::size_t n = 0; n < t.steps(); ++n) z[n] = {scores(n, 0), scores(n, 1)};
  return z;
}

}  // namespace latentdyn
