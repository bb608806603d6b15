#include "dfol/diag.hpp"

#include <cmath>

namespace dfol {

std::string to_string(Estimator e)
{
  switch (e) {
  case Estimator::one_point: return "one_point";
  case Estimator::two_point_I: return "two_point_I";
  case Estimator::two_point_II: return "two_point_II";
  }
  return "?";
}

std::optional<Estimator> estimator_from_string(std::string const &name)
{
  for (auto e : {Estimator::one_point, Estimator::two_point_I, Estimator::two_point_II}) {
    if (to_string(e) == name) { return e; }
  }
  return std::nullopt;
}

double MomentReport::second_moment() const
{
  double const n = double(sample_count);
  double const biased_trace = sample_count > 1 ? cov_trace * (n - 1.0) / n : 0.0;
  return biased_trace + mean.squaredNorm();
}

MomentAccumulator::MomentAccumulator(Eigen::Index d)
  : mean_(VectorXd::Zero(d))
  , m2_(VectorXd::Zero(d))
{
}

void MomentAccumulator::add(VectorXd const &x)
{
  ++n_;
  VectorXd const delta = x - mean_;
  mean_ += delta / double(n_);
  m2_.array() += delta.array() * (x - mean_).array();
}

MomentReport MomentAccumulator::report() const
{
  MomentReport r;
  r.mean = mean_;
  r.sample_count = n_;
  VectorXd const var = n_ > 1 ? VectorXd(m2_ / double(n_ - 1)) : VectorXd::Zero(mean_.size());
  r.se = (var / double(std::max<std::int64_t>(n_, 1))).cwiseSqrt();
  r.cov_trace = var.sum();
  return r;
}

double smoothed_risk(Environment const &env, VectorXd const &theta, double delta, std::int64_t n, Rng &rng)
{
  if (n < 1) { throw InvalidArgument("smoothed_risk: n must be >= 1"); }
  if (!(delta > 0.0)) { throw InvalidArgument("smoothed_risk: delta must be > 0"); }
  if (!env.has_exact_risk()) { throw OracleAbsent("smoothed_risk: " + env.name() + " has no exact risk"); }
  double   sum = 0.0;
  VectorXd point(theta.size());
  for (std::int64_t i = 0; i < n; ++i) {
    point = theta + delta * sample_unit_ball(theta.size(), rng);
    sum += env.exact_risk(point);
  }
  return sum / double(n);
}

MomentReport estimator_moments(Environment const &env, VectorXd const &theta, double delta, std::int64_t n,
                               Estimator estimator, Rng &rng)
{
  if (n < 1) { throw InvalidArgument("estimator_moments: n must be >= 1"); }
  if (!env.has_stationary_sampler()) {
    throw OracleAbsent("estimator_moments: " + env.name() + " has no stationary sampler");
  }
  Eigen::Index const d = env.dim();
  MomentAccumulator  acc(d);
  VectorXd           deployed(d);
  for (std::int64_t i = 0; i < n; ++i) {
    auto const u = sample_unit_sphere(d, rng);
    deployed = theta + delta * u.vector();
    VectorXd const z1 = env.stationary_sample(deployed, rng);
    double         value = env.loss(deployed, z1);
    switch (estimator) {
    case Estimator::one_point: break;
    case Estimator::two_point_I: value -= env.loss(theta, z1); break;
    case Estimator::two_point_II: value -= env.loss(theta, env.stationary_sample(theta, rng)); break;
    }
    acc.add(one_point_gradient(delta, value, u));
  }
  return acc.report();
}

VectorXd finite_diff_grad(std::function<double(VectorXd const &)> const &f, VectorXd const &theta, double h)
{
  if (!(h > 0.0)) { throw InvalidArgument("finite_diff_grad: h must be > 0"); }
  VectorXd g(theta.size());
  VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    double const up = f(probe);
    probe[i] = theta[i] - h;
    double const down = f(probe);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double slope_fit(std::span<double const> xs, std::span<double const> ys)
{
  if (xs.size() != ys.size()) { throw InvalidArgument("slope_fit: xs and ys differ in length"); }
  if (xs.size() < 8) { throw InvalidArgument("slope_fit: need at least 8 points"); }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) { throw DomainError("slope_fit: inputs must be positive"); }
  }
  std::size_t const first = xs.size() / 2;
  std::size_t const n = xs.size() - first;
  double            mx = 0.0, my = 0.0;
  for (std::size_t i = first; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < xs.size(); ++i) {
    double const dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) { throw DomainError("slope_fit: xs are all equal"); }
  return sxy / sxx;
}

} // namespace dfol
