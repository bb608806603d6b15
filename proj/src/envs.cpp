#include "dfol/envs.hpp"

#include <cmath>
#include <string>

namespace dfol {

namespace {

void fill_normal(Eigen::Ref<VectorXd> out, Rng &rng)
{
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = rng.normal();
  }
}

double check_gamma(double gamma)
{
  if (!(gamma > 0.0 && gamma < 1.0)) { throw InvalidArgument("AR environment: gamma must lie in (0, 1)"); }
  return gamma;
}

double check_positive(double v, char const *what)
{
  if (!(v > 0.0) || !std::isfinite(v)) { throw InvalidArgument(std::string(what) + " must be > 0"); }
  return v;
}

} // namespace

// ---------------------------------------------------------------------------------------------
// Environment

void Environment::check_theta(VectorXd const &theta, char const *op) const
{
  if (theta.size() != dim()) {
    throw InvalidArgument(std::string(op) + ": decision has dimension " + std::to_string(theta.size()) +
                          ", environment expects " + std::to_string(dim()));
  }
}

void Environment::check_sample(Eigen::Index size, char const *op) const
{
  if (size != sample_dim()) {
    throw InvalidArgument(std::string(op) + ": sample state has dimension " + std::to_string(size) +
                          ", environment expects " + std::to_string(sample_dim()));
  }
}

void Environment::advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const
{
  check_theta(theta, "kernel_step");
  check_sample(z.size(), "kernel_step");
  do_advance(z, theta, rng);
}

VectorXd Environment::kernel_step(VectorXd const &z, VectorXd const &theta, Rng &rng) const
{
  VectorXd next = z;
  advance(next, theta, rng);
  return next;
}

double Environment::loss(VectorXd const &theta, VectorXd const &z) const
{
  check_theta(theta, "loss");
  check_sample(z.size(), "loss");
  return do_loss(theta, z);
}

VectorXd Environment::loss_grad_theta(VectorXd const &theta, VectorXd const &z) const
{
  check_theta(theta, "loss_grad_theta");
  check_sample(z.size(), "loss_grad_theta");
  return do_loss_grad_theta(theta, z);
}

VectorXd Environment::stationary_sample(VectorXd const &theta, Rng &rng) const
{
  check_theta(theta, "stationary_sample");
  return do_stationary_sample(theta, rng);
}

double Environment::exact_risk(VectorXd const &theta) const
{
  check_theta(theta, "exact_risk");
  return do_exact_risk(theta);
}

VectorXd Environment::exact_risk_grad(VectorXd const &theta) const
{
  check_theta(theta, "exact_risk_grad");
  return do_exact_risk_grad(theta);
}

VectorXd Environment::initial_sample(VectorXd const &theta0, Rng &rng) const
{
  if (has_stationary_sampler()) { return stationary_sample(theta0, rng); }
  return VectorXd::Zero(sample_dim());
}

VectorXd Environment::do_loss_grad_theta(VectorXd const &, VectorXd const &) const
{
  throw OracleAbsent(name() + ": no loss gradient");
}

VectorXd Environment::do_stationary_sample(VectorXd const &, Rng &) const
{
  throw OracleAbsent(name() + ": no stationary sampler");
}

double Environment::do_exact_risk(VectorXd const &) const
{
  throw OracleAbsent(name() + ": no exact risk");
}

VectorXd Environment::do_exact_risk_grad(VectorXd const &) const
{
  throw OracleAbsent(name() + ": no exact risk gradient");
}

// ---------------------------------------------------------------------------------------------
// ArScalarQuartic

ArScalarQuartic::ArScalarQuartic(double gamma, double sigma)
  : gamma_(check_gamma(gamma))
  , sigma_(check_positive(sigma, "ar_quartic: sigma"))
  , innovation_sd_(std::sqrt((2.0 - gamma) / gamma) * sigma)
{
}

double ArScalarQuartic::loss_factor(double theta)
{
  return theta * (3.0 * theta * theta - 8.0 * theta - 48.0) / 12.0;
}

void ArScalarQuartic::do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const
{
  double const fresh = theta[0] + innovation_sd_ * rng.normal();
  z[0] = (1.0 - gamma_) * z[0] + gamma_ * fresh;
}

double ArScalarQuartic::do_loss(VectorXd const &theta, VectorXd const &z) const
{
  return z[0] * loss_factor(theta[0]);
}

VectorXd ArScalarQuartic::do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const
{
  double const t = theta[0];
  return VectorXd::Constant(1, z[0] * (9.0 * t * t - 16.0 * t - 48.0) / 12.0);
}

VectorXd ArScalarQuartic::do_stationary_sample(VectorXd const &theta, Rng &rng) const
{
  return VectorXd::Constant(1, theta[0] + sigma_ * rng.normal());
}

double ArScalarQuartic::do_exact_risk(VectorXd const &theta) const
{
  return theta[0] * loss_factor(theta[0]);
}

VectorXd ArScalarQuartic::do_exact_risk_grad(VectorXd const &theta) const
{
  double const t = theta[0];
  return VectorXd::Constant(1, t * (t - 4.0) * (t + 2.0));
}

// ---------------------------------------------------------------------------------------------
// ArPricing

ArPricing::ArPricing(double gamma, double sigma, double kappa, VectorXd mu0)
  : gamma_(check_gamma(gamma))
  , sigma_(check_positive(sigma, "ar_pricing: sigma"))
  , kappa_(check_positive(kappa, "ar_pricing: kappa"))
  , mu0_(std::move(mu0))
  , innovation_sd_(std::sqrt((2.0 - gamma) / gamma) * sigma)
{
  if (mu0_.size() < 1) { throw InvalidArgument("ar_pricing: mu0 must be non-empty"); }
}

VectorXd ArPricing::default_mu0(Eigen::Index d)
{
  static double const pattern[] = {5.0, -5.0, -5.0, 5.0, -5.0};
  VectorXd            mu(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    mu[i] = pattern[i % 5];
  }
  return mu;
}

ArPricing ArPricing::with_defaults(Eigen::Index d)
{
  return ArPricing(0.1, 1.0, 0.5, default_mu0(d));
}

VectorXd ArPricing::optimum() const
{
  return mu0_ / (2.0 * kappa_);
}

void ArPricing::do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const
{
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double const fresh = mu0_[i] - kappa_ * theta[i] + innovation_sd_ * rng.normal();
    z[i] = (1.0 - gamma_) * z[i] + gamma_ * fresh;
  }
}

double ArPricing::do_loss(VectorXd const &theta, VectorXd const &z) const
{
  return -theta.dot(z);
}

VectorXd ArPricing::do_loss_grad_theta(VectorXd const &, VectorXd const &z) const
{
  return -z;
}

VectorXd ArPricing::do_stationary_sample(VectorXd const &theta, Rng &rng) const
{
  VectorXd z(dim());
  fill_normal(z, rng);
  return (mu0_ - kappa_ * theta + sigma_ * z).eval();
}

double ArPricing::do_exact_risk(VectorXd const &theta) const
{
  return kappa_ * theta.squaredNorm() - theta.dot(mu0_);
}

VectorXd ArPricing::do_exact_risk_grad(VectorXd const &theta) const
{
  return 2.0 * kappa_ * theta - mu0_;
}

// ---------------------------------------------------------------------------------------------
// ArRegression

ArRegression::ArRegression(double gamma, double sigma1, double sigma2, double kappa, VectorXd w0)
  : gamma_(check_gamma(gamma))
  , sigma1_(check_positive(sigma1, "ar_regression: sigma1"))
  , sigma2_(check_positive(sigma2, "ar_regression: sigma2"))
  , kappa_(kappa)
  , w0_(std::move(w0))
  , inflate_(std::sqrt((2.0 - gamma) / gamma))
{
  if (w0_.size() < 1) { throw InvalidArgument("ar_regression: theta_star0 must be non-empty"); }
  if (!std::isfinite(kappa_)) { throw InvalidArgument("ar_regression: kappa must be finite"); }
}

VectorXd ArRegression::default_w0(Eigen::Index d)
{
  VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    w[i] = (i % 2 == 0) ? 5.0 : -5.0;
  }
  return w;
}

ArRegression ArRegression::with_defaults(Eigen::Index d)
{
  VectorXd w = default_w0(d);
  double   k = 1.0 / w.norm();
  return ArRegression(0.25, 1.0, 1.0, k, std::move(w));
}

VectorXd ArRegression::minimizer() const
{
  Eigen::Index const d = dim();
  Eigen::MatrixXd    a = sigma1_ * sigma1_ * Eigen::MatrixXd::Identity(d, d);
  a.noalias() += kappa_ * kappa_ * w0_ * w0_.transpose();
  return a.ldlt().solve(sigma1_ * sigma1_ * w0_);
}

void ArRegression::do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const
{
  Eigen::Index const d = dim();
  double const       shift = kappa_ * theta.dot(w0_);
  double             mean_y = shift;
  for (Eigen::Index i = 0; i < d; ++i) {
    double const x = inflate_ * sigma1_ * rng.normal();
    mean_y += x * w0_[i];
    z[i] = (1.0 - gamma_) * z[i] + gamma_ * x;
  }
  double const y = mean_y + inflate_ * sigma2_ * rng.normal();
  z[d] = (1.0 - gamma_) * z[d] + gamma_ * y;
}

double ArRegression::do_loss(VectorXd const &theta, VectorXd const &z) const
{
  Eigen::Index const d = dim();
  double const       r = z.head(d).dot(theta) - z[d];
  return r * r;
}

VectorXd ArRegression::do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const
{
  Eigen::Index const d = dim();
  double const       r = z.head(d).dot(theta) - z[d];
  return 2.0 * r * z.head(d);
}

VectorXd ArRegression::do_stationary_sample(VectorXd const &theta, Rng &rng) const
{
  Eigen::Index const d = dim();
  VectorXd           z(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    z[i] = sigma1_ * rng.normal();
  }
  z[d] = (z.head(d) + kappa_ * theta).dot(w0_) + sigma2_ * rng.normal();
  return z;
}

double ArRegression::do_exact_risk(VectorXd const &theta) const
{
  double const c = theta.dot(w0_);
  return sigma1_ * sigma1_ * (theta - w0_).squaredNorm() + kappa_ * kappa_ * c * c + sigma2_ * sigma2_;
}

VectorXd ArRegression::do_exact_risk_grad(VectorXd const &theta) const
{
  double const c = theta.dot(w0_);
  return 2.0 * sigma1_ * sigma1_ * (theta - w0_) + 2.0 * kappa_ * kappa_ * c * w0_;
}

} // namespace dfol
