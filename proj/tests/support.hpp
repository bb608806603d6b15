#pragma once

// Test-only environments.

#include "dfol/envs.hpp"

#include <vector>

namespace dfol::test {

// Loss identically c; random-walk kernel; no oracles.
class ConstantLossEnv final : public Environment
{
public:
  ConstantLossEnv(Eigen::Index d, double c)
    : d_(d)
    , c_(c)
  {
  }

  std::string  name() const override { return "constant"; }
  Eigen::Index dim() const override { return d_; }
  Eigen::Index sample_dim() const override { return 1; }

protected:
  void do_advance(Eigen::Ref<VectorXd> z, VectorXd const &, Rng &rng) const override { z[0] = 0.5 * z[0] + rng.normal(); }
  double do_loss(VectorXd const &, VectorXd const &) const override { return c_; }

private:
  Eigen::Index d_;
  double       c_;
};

// Forwards to another environment and logs every deployed model, sample and loss query.
class RecordingEnv final : public Environment
{
public:
  explicit RecordingEnv(Environment const &inner)
    : inner_(inner)
  {
  }

  std::string  name() const override { return "recording(" + inner_.name() + ")"; }
  Eigen::Index dim() const override { return inner_.dim(); }
  Eigen::Index sample_dim() const override { return inner_.sample_dim(); }
  double       mixing_rate() const override { return inner_.mixing_rate(); }
  bool         has_loss_grad() const override { return inner_.has_loss_grad(); }
  bool         has_stationary_sampler() const override { return inner_.has_stationary_sampler(); }
  bool         has_exact_risk() const override { return inner_.has_exact_risk(); }

  mutable std::vector<VectorXd> deployed;
  mutable std::vector<VectorXd> samples;
  mutable std::vector<VectorXd> loss_theta;
  mutable std::vector<double>   loss_value;

protected:
  void do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const override
  {
    inner_.advance(z, theta, rng);
    deployed.push_back(theta);
    samples.push_back(z);
  }
  double do_loss(VectorXd const &theta, VectorXd const &z) const override
  {
    double const l = inner_.loss(theta, z);
    loss_theta.push_back(theta);
    loss_value.push_back(l);
    return l;
  }
  VectorXd do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const override
  {
    return inner_.loss_grad_theta(theta, z);
  }
  VectorXd do_stationary_sample(VectorXd const &theta, Rng &rng) const override
  {
    return inner_.stationary_sample(theta, rng);
  }
  double   do_exact_risk(VectorXd const &theta) const override { return inner_.exact_risk(theta); }
  VectorXd do_exact_risk_grad(VectorXd const &theta) const override { return inner_.exact_risk_grad(theta); }

private:
  Environment const &inner_;
};

struct Moments
{
  double mean;
  double var;
};

inline Moments moments(std::vector<double> const &xs)
{
  double m = 0.0;
  for (double x : xs) {
    m += x;
  }
  m /= double(xs.size());
  double v = 0.0;
  for (double x : xs) {
    v += (x - m) * (x - m);
  }
  return {m, v / double(xs.size() - 1)};
}

} // namespace dfol::test
