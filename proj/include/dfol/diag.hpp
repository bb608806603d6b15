#pragma once

#include "envs.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace dfol {

enum class Estimator
{
  one_point,
  two_point_I,
  two_point_II
};

std::string              to_string(Estimator e);
std::optional<Estimator> estimator_from_string(std::string const &name);

struct MomentReport
{
  VectorXd     mean;
  VectorXd     se; // sample standard deviation / sqrt(n), per component
  double       cov_trace = 0.0;
  std::int64_t sample_count = 0;

  // E|g|^2 estimated from the same draws.
  double second_moment() const;
};

// Streaming per-component mean and variance (Welford).
class MomentAccumulator
{
public:
  explicit MomentAccumulator(Eigen::Index d);

  void         add(VectorXd const &x);
  MomentReport report() const;

private:
  std::int64_t n_ = 0;
  VectorXd     mean_;
  VectorXd     m2_;
};

// Monte-Carlo ball average of the exact risk, n uniform draws w from the unit ball.
double smoothed_risk(Environment const &env, VectorXd const &theta, double delta, std::int64_t n, Rng &rng);

// n independent draws of the tagged estimator, each with fresh u and stationary samples at
// the deployed point(s).
MomentReport estimator_moments(Environment const &env, VectorXd const &theta, double delta, std::int64_t n,
                               Estimator estimator, Rng &rng);

VectorXd finite_diff_grad(std::function<double(VectorXd const &)> const &f, VectorXd const &theta, double h);

// Least-squares slope of log(ys) against log(xs) over the trailing half of the points.
double slope_fit(std::span<double const> xs, std::span<double const> ys);

} // namespace dfol
