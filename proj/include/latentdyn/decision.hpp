#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace latentdyn {

/// Finite counterfactual environment over contexts X, evidence E, actions A
/// and outcomes Y.
///
/// Tables are dense and row-major in the index order of their accessors:
/// prior(x, e), obs(y | x, e, a), cf(y* | x, a, y, abar), utility(a, x, y).
/// Counterfactual rows with abar == a are stored but never read.
class EnvironmentModel {
 public:
  EnvironmentModel() = default;
  /// Zero-filled tables with labels x0.., e0.., a0.., y0...
  EnvironmentModel(std::size_t nx, std::size_t ne, std::size_t na, std::size_t ny);
  EnvironmentModel(std::vector<std::string> xs, std::vector<std::string> es, std::vector<std::string> as,
                   std::vector<std::string> ys);

  std::size_t nx() const noexcept { return xs_.size(); }
  std::size_t ne() const noexcept { return es_.size(); }
  std::size_t na() const noexcept { return as_.size(); }
  std::size_t ny() const noexcept { return ys_.size(); }
  const std::vector<std::string>& x_labels() const noexcept { return xs_; }
  const std::vector<std::string>& e_labels() const noexcept { return es_; }
  const std::vector<std::string>& a_labels() const noexcept { return as_; }
  const std::vector<std::string>& y_labels() const noexcept { return ys_; }

  double& prior(std::size_t x, std::size_t e) { return prior_[x * ne() + e]; }
  double prior(std::size_t x, std::size_t e) const { return prior_[x * ne() + e]; }
  double& obs(std::size_t y, std::size_t x, std::size_t e, std::size_t a) { return obs_[obs_index(x, e, a) + y]; }
  double obs(std::size_t y, std::size_t x, std::size_t e, std::size_t a) const { return obs_[obs_index(x, e, a) + y]; }
  double& cf(std::size_t ystar, std::size_t x, std::size_t a, std::size_t y, std::size_t abar) {
    return cf_[cf_index(x, a, y, abar) + ystar];
  }
  double cf(std::size_t ystar, std::size_t x, std::size_t a, std::size_t y, std::size_t abar) const {
    return cf_[cf_index(x, a, y, abar) + ystar];
  }
  double& utility(std::size_t a, std::size_t x, std::size_t y) { return utility_[(a * nx() + x) * ny() + y]; }
  double utility(std::size_t a, std::size_t x, std::size_t y) const { return utility_[(a * nx() + x) * ny() + y]; }

  /// InvalidModel unless every probability row is nonnegative and sums to 1
  /// within 1e-12 (the prior as a whole table).
  void validate() const;

 private:
  std::size_t obs_index(std::size_t x, std::size_t e, std::size_t a) const { return ((x * ne() + e) * na() + a) * ny(); }
  std::size_t cf_index(std::size_t x, std::size_t a, std::size_t y, std::size_t abar) const {
    return (((x * na() + a) * ny() + y) * na() + abar) * ny();
  }
  void allocate();

  std::vector<std::string> xs_, es_, as_, ys_;
  std::vector<double> prior_, obs_, cf_, utility_;
};

inline constexpr double kProbabilityTolerance = 1e-12;

/// Stochastic policy pi(a | x, e).
class Policy {
 public:
  Policy() = default;
  Policy(std::size_t nx, std::size_t ne, std::size_t na);
  /// Uniform over actions in every context.
  static Policy uniform(std::size_t nx, std::size_t ne, std::size_t na);
  /// Dirac rows; choice[x * ne + e] is the chosen action.
  static Policy deterministic(std::size_t nx, std::size_t ne, std::size_t na, const std::vector<std::size_t>& choice);
  /// weight * p + (1 - weight) * q, row by row.
  static Policy mix(const Policy& p, const Policy& q, double weight);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ne() const noexcept { return ne_; }
  std::size_t na() const noexcept { return na_; }
  double& operator()(std::size_t a, std::size_t x, std::size_t e) { return table_[(x * ne_ + e) * na_ + a]; }
  double operator()(std::size_t a, std::size_t x, std::size_t e) const { return table_[(x * ne_ + e) * na_ + a]; }

  void validate() const;

 private:
  std::size_t nx_ = 0, ne_ = 0, na_ = 0;
  std::vector<double> table_;
};

/// How harms against the alternatives abar != a combine for a realized y.
enum class Aggregate { Max, Mean };

Aggregate parse_aggregate(std::string_view name);
std::string_view aggregate_name(Aggregate a) noexcept;

/// sum_{y*} cf(y* | x, a, y, abar) * max(0, U(abar, x, y*) - U(a, x, y)).
double harm(const EnvironmentModel& m, std::size_t a, std::size_t x, std::size_t y, std::size_t abar);

/// L(a | x, e) = sum_y obs(y | x, e, a) * agg_{abar != a} harm(a, x, y, abar).
double action_risk(const EnvironmentModel& m, std::size_t a, std::size_t x, std::size_t e,
                   Aggregate aggregate = Aggregate::Max);

/// R(pi) = sum_{x,e} prior(x, e) sum_a pi(a | x, e) L(a | x, e).
double policy_risk(const EnvironmentModel& m, const Policy& p, Aggregate aggregate = Aggregate::Max);

/// The solved decision function: the table is f*(x, e) itself.
struct DecisionTable {
  Aggregate aggregate = Aggregate::Max;
  std::size_t nx = 0, ne = 0, na = 0;
  std::vector<std::size_t> action;  // [x * ne + e]
  std::vector<double> action_risks;  // L(a | x, e) at [(x * ne + e) * na + a]
  double risk = 0.0;

  std::size_t operator()(std::size_t x, std::size_t e) const { return action[x * ne + e]; }
  Policy policy() const;
};

/// Pointwise argmin of L(a | x, e); ties go to the lowest action index.
DecisionTable solve_bayes(const EnvironmentModel& m, Aggregate aggregate = Aggregate::Max);

/// Text model format:
///
///   X: x0 x1
///   E: e0
///   A: a0 a1
///   Y: y0 y1
///   prior:
///     x0 e0 = 0.5
///   obs:
///     x0 e0 a0 = 0.3 0.7        # P(y | x, e, a) for y in Y order
///   cf:
///     x0 a0 y0 a1 = 0.5 0.5     # P(y* | x, a, y, abar), abar != a
///   utility:
///     a0 x0 = 1 0               # U(a, x, y) for y in Y order
///
/// '#' starts a comment. Errors name the offending line.
EnvironmentModel parse_environment_model(std::string_view text);
EnvironmentModel load_environment_model(const std::filesystem::path& path);
std::string format_environment_model(const EnvironmentModel& m);

/// Decision table as text, one "x e action risk" line per context.
std::string format_decision_table(const EnvironmentModel& m, const DecisionTable& t);

}  // namespace latentdyn
