#include "latentdyn/decision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latentdyn/error.hpp"

namespace latentdyn {

namespace {

std::vector<std::string> default_labels(char prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, prefix) + std::to_string(i));
  return out;
}

void check_row(double sum, bool negative, const std::string& what) {
  if (negative) fail(ErrorCode::InvalidModel, what + " has a negative probability");
  if (!(std::abs(sum - 1.0) <= kProbabilityTolerance)) {
    fail(ErrorCode::InvalidModel, what + " sums to " + std::to_string(sum) + ", not 1");
  }
}

void check_index(std::size_t i, std::size_t n, const char* what) {
  if (i >= n) {
    fail(ErrorCode::IndexOutOfModel,
         std::string(what) + " index " + std::to_string(i) + " outside model of size " + std::to_string(n));
  }
}

}  // namespace

EnvironmentModel::EnvironmentModel(std::size_t nx, std::size_t ne, std::size_t na, std::size_t ny)
    : EnvironmentModel(default_labels('x', nx), default_labels('e', ne), default_labels('a', na),
                       default_labels('y', ny)) {}

EnvironmentModel::EnvironmentModel(std::vector<std::string> xs, std::vector<std::string> es,
                                   std::vector<std::string> as, std::vector<std::string> ys)
    : xs_(std::move(xs)), es_(std::move(es)), as_(std::move(as)), ys_(std::move(ys)) {
  if (xs_.empty() || es_.empty() || as_.empty() || ys_.empty()) {
    fail(ErrorCode::InvalidModel, "X, E, A and Y must all be nonempty");
  }
  allocate();
}

void EnvironmentModel::allocate() {
  prior_.assign(nx() * ne(), 0.0);
  obs_.assign(nx() * ne() * na() * ny(), 0.0);
  cf_.assign(nx() * na() * ny() * na() * ny(), 0.0);
  utility_.assign(na() * nx() * ny(), 0.0);
}

void EnvironmentModel::validate() const {
  double total = 0.0;
  bool negative = false;
  for (double p : prior_) {
    total += p;
    negative = negative || p < 0.0;
  }
  check_row(total, negative, "prior");

  for (std::size_t x = 0; x < nx(); ++x)
    for (std::size_t e = 0; e < ne(); ++e)
      for (std::size_t a = 0; a < na(); ++a) {
        double s = 0.0;
        bool neg = false;
        for (std::size_t y = 0; y < ny(); ++y) {
          s += obs(y, x, e, a);
          neg = neg || obs(y, x, e, a) < 0.0;
        }
        check_row(s, neg, "obs row (" + xs_[x] + ", " + es_[e] + ", " + as_[a] + ")");
      }

  for (std::size_t x = 0; x < nx(); ++x)
    for (std::size_t a = 0; a < na(); ++a)
      for (std::size_t y = 0; y < ny(); ++y)
        for (std::size_t abar = 0; abar < na(); ++abar) {
          if (abar == a) continue;
          double s = 0.0;
          bool neg = false;
          for (std::size_t ys = 0; ys < ny(); ++ys) {
            s += cf(ys, x, a, y, abar);
            neg = neg || cf(ys, x, a, y, abar) < 0.0;
          }
          check_row(s, neg, "cf row (" + xs_[x] + ", " + as_[a] + ", " + ys_[y] + ", " + as_[abar] + ")");
        }

  for (double u : utility_) {
    if (!std::isfinite(u)) fail(ErrorCode::InvalidModel, "utility contains a non-finite value");
  }
}

Policy::Policy(std::size_t nx, std::size_t ne, std::size_t na)
    : nx_(nx), ne_(ne), na_(na), table_(nx * ne * na, 0.0) {}

Policy Policy::uniform(std::size_t nx, std::size_t ne, std::size_t na) {
  Policy p(nx, ne, na);
  std::fill(p.table_.begin(), p.table_.end(), 1.0 / static_cast<double>(na));
  return p;
}

Policy Policy::deterministic(std::size_t nx, std::size_t ne, std::size_t na, const std::vector<std::size_t>& choice) {
  if (choice.size() != nx * ne) fail(ErrorCode::DimensionMismatch, "deterministic policy needs one action per context");
  Policy p(nx, ne, na);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t e = 0; e < ne; ++e) {
      const std::size_t a = choice[x * ne + e];
      check_index(a, na, "action");
      p(a, x, e) = 1.0;
    }
  return p;
}

Policy Policy::mix(const Policy& p, const Policy& q, double weight) {
  if (p.nx_ != q.nx_ || p.ne_ != q.ne_ || p.na_ != q.na_) fail(ErrorCode::DimensionMismatch, "policy shapes differ");
  Policy out(p.nx_, p.ne_, p.na_);
  for (std::size_t i = 0; i < out.table_.size(); ++i) out.table_[i] = weight * p.table_[i] + (1.0 - weight) * q.table_[i];
  return out;
}

void Policy::validate() const {
  for (std::size_t x = 0; x < nx_; ++x)
    for (std::size_t e = 0; e < ne_; ++e) {
      double s = 0.0;
      bool neg = false;
      for (std::size_t a = 0; a < na_; ++a) {
        s += (*this)(a, x, e);
        neg = neg || (*this)(a, x, e) < 0.0;
      }
      if (neg || !(std::abs(s - 1.0) <= kProbabilityTolerance)) {
        fail(ErrorCode::Precondition,
             "policy row (" + std::to_string(x) + ", " + std::to_string(e) + ") is not a distribution");
      }
    }
}

Aggregate parse_aggregate(std::string_view name) {
  if (name == "max") return Aggregate::Max;
  if (name == "mean") return Aggregate::Mean;
  fail(ErrorCode::Precondition, "unknown aggregate '" + std::string(name) + "' (expected max or mean)");
}

std::string_view aggregate_name(Aggregate a) noexcept { return a == Aggregate::Max ? "max" : "mean"; }

double harm(const EnvironmentModel& m, std::size_t a, std::size_t x, std::size_t y, std::size_t abar) {
  check_index(a, m.na(), "action");
  check_index(abar, m.na(), "alternative action");
  check_index(x, m.nx(), "X");
  check_index(y, m.ny(), "Y");
  if (a == abar) fail(ErrorCode::Precondition, "harm needs an alternative action different from a");
  const double realized = m.utility(a, x, y);
  double h = 0.0;
  for (std::size_t ys = 0; ys < m.ny(); ++ys) {
    h += m.cf(ys, x, a, y, abar) * std::max(0.0, m.utility(abar, x, ys) - realized);
  }
  return h;
}

double action_risk(const EnvironmentModel& m, std::size_t a, std::size_t x, std::size_t e, Aggregate aggregate) {
  check_index(a, m.na(), "action");
  check_index(x, m.nx(), "X");
  check_index(e, m.ne(), "E");
  if (m.na() < 2) fail(ErrorCode::Precondition, "action risk needs at least two actions");
  double risk = 0.0;
  for (std::size_t y = 0; y < m.ny(); ++y) {
    double agg = 0.0;
    for (std::size_t abar = 0; abar < m.na(); ++abar) {
      if (abar == a) continue;
      const double h = harm(m, a, x, y, abar);
      agg = aggregate == Aggregate::Max ? std::max(agg, h) : agg + h;
    }
    if (aggregate == Aggregate::Mean) agg /= static_cast<double>(m.na() - 1);
    risk += m.obs(y, x, e, a) * agg;
  }
  return risk;
}

double policy_risk(const EnvironmentModel& m, const Policy& p, Aggregate aggregate) {
  if (p.nx() != m.nx() || p.ne() != m.ne() || p.na() != m.na()) {
    fail(ErrorCode::IndexOutOfModel, "policy shape does not match the model");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t e = 0; e < m.ne(); ++e) {
      double r = 0.0;
      for (std::size_t a = 0; a < m.na(); ++a) r += p(a, x, e) * action_risk(m, a, x, e, aggregate);
      total += m.prior(x, e) * r;
    }
  return total;
}

Policy DecisionTable::policy() const { return Policy::deterministic(nx, ne, na, action); }

DecisionTable solve_bayes(const EnvironmentModel& m, Aggregate aggregate) {
  m.validate();
  DecisionTable t;
  t.aggregate = aggregate;
  t.nx = m.nx();
  t.ne = m.ne();
  t.na = m.na();
  t.action.assign(t.nx * t.ne, 0);
  t.action_risks.assign(t.nx * t.ne * t.na, 0.0);
  for (std::size_t x = 0; x < m.nx(); ++x)
    for (std::size_t e = 0; e < m.ne(); ++e) {
      const std::size_t ctx = x * m.ne() + e;
      std::size_t best = 0;
      for (std::size_t a = 0; a < m.na(); ++a) {
        const double l = action_risk(m, a, x, e, aggregate);
        t.action_risks[ctx * m.na() + a] = l;
        if (l < t.action_risks[ctx * m.na() + best]) best = a;
      }
      t.action[ctx] = best;
    }
  t.risk = policy_risk(m, t.policy(), aggregate);
  return t;
}

}  // namespace latentdyn
