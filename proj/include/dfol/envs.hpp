#pragma once

#include "core.hpp"

#include <memory>
#include <string>

namespace dfol {

// A decision-controlled Markov kernel together with its loss and, optionally, exact oracles for
// the stationary law and the performative risk. Public members validate dimensions and forward
// to the protected do_* hooks. Implementations are immutable; the chain state z is owned by the
// caller.
class Environment
{
public:
  virtual ~Environment() = default;

  virtual std::string  name() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual Eigen::Index sample_dim() const = 0;

  // Mixing-rate estimate reported to the schedule.
  virtual double mixing_rate() const { return 0.0; }

  virtual bool has_loss_grad() const { return false; }
  virtual bool has_stationary_sampler() const { return false; }
  virtual bool has_exact_risk() const { return false; }

  // One transition of the kernel controlled by the deployed model, in place.
  void advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const;
  VectorXd kernel_step(VectorXd const &z, VectorXd const &theta, Rng &rng) const;

  double   loss(VectorXd const &theta, VectorXd const &z) const;
  VectorXd loss_grad_theta(VectorXd const &theta, VectorXd const &z) const;
  VectorXd stationary_sample(VectorXd const &theta, Rng &rng) const;
  double   exact_risk(VectorXd const &theta) const;
  VectorXd exact_risk_grad(VectorXd const &theta) const;

  // z_0: a stationary draw at the initial model when available, else the zero state.
  VectorXd initial_sample(VectorXd const &theta0, Rng &rng) const;

protected:
  virtual void     do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const = 0;
  virtual double   do_loss(VectorXd const &theta, VectorXd const &z) const = 0;
  virtual VectorXd do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const;
  virtual VectorXd do_stationary_sample(VectorXd const &theta, Rng &rng) const;
  virtual double   do_exact_risk(VectorXd const &theta) const;
  virtual VectorXd do_exact_risk_grad(VectorXd const &theta) const;

  void check_theta(VectorXd const &theta, char const *op) const;
  void check_sample(Eigen::Index size, char const *op) const;
};

// Scalar AR(1) chain Z' = (1-g) Z + g Zbar, Zbar ~ N(theta, (2-g)/g sigma^2), whose stationary
// law is N(theta, sigma^2), with the quartic loss z * theta * (3 theta^2 - 8 theta - 48) / 12.
class ArScalarQuartic final : public Environment
{
public:
  explicit ArScalarQuartic(double gamma = 0.5, double sigma = 1.0);

  std::string  name() const override { return "ar_quartic"; }
  Eigen::Index dim() const override { return 1; }
  Eigen::Index sample_dim() const override { return 1; }
  double       mixing_rate() const override { return 1.0 - gamma_; }
  bool         has_loss_grad() const override { return true; }
  bool         has_stationary_sampler() const override { return true; }
  bool         has_exact_risk() const override { return true; }

  double gamma() const { return gamma_; }
  double sigma() const { return sigma_; }

  // theta * (3 theta^2 - 8 theta - 48) / 12; the loss is z times this.
  static double loss_factor(double theta);

protected:
  void     do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const override;
  double   do_loss(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_stationary_sample(VectorXd const &theta, Rng &rng) const override;
  double   do_exact_risk(VectorXd const &theta) const override;
  VectorXd do_exact_risk_grad(VectorXd const &theta) const override;

private:
  double gamma_;
  double sigma_;
  double innovation_sd_;
};

// Markovian pricing: stationary law N(mu0 - kappa theta, sigma^2 I), loss -<theta, z>.
class ArPricing final : public Environment
{
public:
  ArPricing(double gamma, double sigma, double kappa, VectorXd mu0);
  static ArPricing with_defaults(Eigen::Index d = 5);
  static VectorXd  default_mu0(Eigen::Index d);

  std::string  name() const override { return "ar_pricing"; }
  Eigen::Index dim() const override { return mu0_.size(); }
  Eigen::Index sample_dim() const override { return mu0_.size(); }
  double       mixing_rate() const override { return 1.0 - gamma_; }
  bool         has_loss_grad() const override { return true; }
  bool         has_stationary_sampler() const override { return true; }
  bool         has_exact_risk() const override { return true; }

  double          gamma() const { return gamma_; }
  double          sigma() const { return sigma_; }
  double          kappa() const { return kappa_; }
  VectorXd const &mu0() const { return mu0_; }

  // mu0 / (2 kappa)
  VectorXd optimum() const;

protected:
  void     do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const override;
  double   do_loss(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_stationary_sample(VectorXd const &theta, Rng &rng) const override;
  double   do_exact_risk(VectorXd const &theta) const override;
  VectorXd do_exact_risk_grad(VectorXd const &theta) const override;

private:
  double   gamma_;
  double   sigma_;
  double   kappa_;
  VectorXd mu0_;
  double   innovation_sd_;
};

// Performative linear regression on an AR-averaged pair z = (x, y), x in R^d.
// Stationary law at theta: X ~ N(0, s1^2 I), Y | X ~ N(<X + kappa theta, w0>, s2^2).
// Risk: s1^2 |theta - w0|^2 + kappa^2 <theta, w0>^2 + s2^2.
class ArRegression final : public Environment
{
public:
  ArRegression(double gamma, double sigma1, double sigma2, double kappa, VectorXd w0);
  static ArRegression with_defaults(Eigen::Index d = 5);
  static VectorXd     default_w0(Eigen::Index d);

  std::string  name() const override { return "ar_regression"; }
  Eigen::Index dim() const override { return w0_.size(); }
  Eigen::Index sample_dim() const override { return w0_.size() + 1; }
  double       mixing_rate() const override { return 1.0 - gamma_; }
  bool         has_loss_grad() const override { return true; }
  bool         has_stationary_sampler() const override { return true; }
  bool         has_exact_risk() const override { return true; }

  double          gamma() const { return gamma_; }
  double          sigma1() const { return sigma1_; }
  double          sigma2() const { return sigma2_; }
  double          kappa() const { return kappa_; }
  VectorXd const &w0() const { return w0_; }

  // Unique minimizer of the risk: (s1^2 I + kappa^2 w0 w0^T) theta = s1^2 w0.
  VectorXd minimizer() const;

protected:
  void     do_advance(Eigen::Ref<VectorXd> z, VectorXd const &theta, Rng &rng) const override;
  double   do_loss(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_loss_grad_theta(VectorXd const &theta, VectorXd const &z) const override;
  VectorXd do_stationary_sample(VectorXd const &theta, Rng &rng) const override;
  double   do_exact_risk(VectorXd const &theta) const override;
  VectorXd do_exact_risk_grad(VectorXd const &theta) const override;

private:
  double   gamma_;
  double   sigma1_;
  double   sigma2_;
  double   kappa_;
  VectorXd w0_;
  double   inflate_;
};

} // namespace dfol
