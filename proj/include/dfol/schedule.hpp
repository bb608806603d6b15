#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dfol {

// Which exponent constraint a schedule is validated against.
//  smooth:    2*alpha - 4*beta in (0, 1)
//  nonsmooth: 0 < 3*beta < alpha < 1
//  free:      only the base constraints (ablations)
enum class ScheduleKind
{
  smooth,
  nonsmooth,
  free
};

std::string                 to_string(ScheduleKind kind);
std::optional<ScheduleKind> schedule_kind_from_string(std::string const &name);

struct ScheduleParams
{
  double alpha = 2.0 / 3.0;
  double beta = 1.0 / 6.0;
  double eta0 = 1.0;
  double delta0 = 1.0;
  // Unset: 2 / ln(1 / max(rho, lambda)), or 0 when that maximum is 0.
  std::optional<double> tau0;
  double                lambda = 0.0;
  double                rho = 0.0;
};

struct StepSizes
{
  double       eta;
  double       delta;
  std::int64_t tau;
};

// Step size eta_k = eta0 / (1+k)^alpha, query radius delta_k = delta0 / (1+k)^beta and
// epoch length tau_k = max(1, ceil(tau0 * ln(1+k))).
class Schedule
{
public:
  Schedule(ScheduleParams const &params, ScheduleKind kind = ScheduleKind::smooth);

  // The exponents and constants of the main convergence result for dimension d:
  // eta0 = d^{-2/3}, delta0 = d^{1/3}, alpha = 2/3, beta = 1/6.
  static Schedule theorem_rate(std::int64_t d, double lambda, double rho);

  // alpha = 3/4, beta = 1/6.
  static Schedule nonsmooth(double eta0, double delta0, double lambda, double rho);

  StepSizes at(std::int64_t k) const;

  double       alpha() const { return params_.alpha; }
  double       beta() const { return params_.beta; }
  double       eta0() const { return params_.eta0; }
  double       delta0() const { return params_.delta0; }
  double       tau0() const { return tau0_; }
  double       lambda() const { return params_.lambda; }
  double       rho() const { return params_.rho; }
  ScheduleKind kind() const { return kind_; }

  ScheduleParams const &params() const { return params_; }

  // Sum of tau_k for k < epochs.
  std::int64_t total_samples(std::int64_t epochs) const;

private:
  ScheduleParams params_;
  ScheduleKind   kind_;
  double         tau0_;
};

double default_tau0(double lambda, double rho);

} // namespace dfol
