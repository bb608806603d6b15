#include "dfol/schedule.hpp"

#include "dfol/error.hpp"

#include <algorithm>
#include <cmath>

namespace dfol {

std::string to_string(ScheduleKind kind)
{
  switch (kind) {
  case ScheduleKind::smooth: return "smooth";
  case ScheduleKind::nonsmooth: return "nonsmooth";
  case ScheduleKind::free: return "free";
  }
  return "?";
}

std::optional<ScheduleKind> schedule_kind_from_string(std::string const &name)
{
  if (name == "smooth") { return ScheduleKind::smooth; }
  if (name == "nonsmooth") { return ScheduleKind::nonsmooth; }
  if (name == "free") { return ScheduleKind::free; }
  return std::nullopt;
}

double default_tau0(double lambda, double rho)
{
  double const m = std::max(lambda, rho);
  if (m <= 0.0) { return 0.0; }
  return 2.0 / std::log(1.0 / m);
}

namespace {

void require(bool ok, char const *what)
{
  if (!ok) { throw InvalidArgument(std::string("Schedule: ") + what); }
}

} // namespace

Schedule::Schedule(ScheduleParams const &params, ScheduleKind kind)
  : params_(params)
  , kind_(kind)
  , tau0_(params.tau0 ? *params.tau0 : default_tau0(params.lambda, params.rho))
{
  double const a = params_.alpha;
  double const b = params_.beta;
  require(a > 0.0 && a < 1.0, "alpha must lie in (0, 1)");
  require(b >= 0.0 && b < 0.5, "beta must lie in [0, 1/2)");
  require(params_.eta0 > 0.0 && std::isfinite(params_.eta0), "eta0 must be > 0");
  require(params_.delta0 > 0.0 && std::isfinite(params_.delta0), "delta0 must be > 0");
  require(tau0_ >= 0.0 && std::isfinite(tau0_), "tau0 must be >= 0");
  require(params_.lambda >= 0.0 && params_.lambda < 1.0, "lambda must lie in [0, 1)");
  require(params_.rho >= 0.0 && params_.rho < 1.0, "rho must lie in [0, 1)");
  switch (kind_) {
  case ScheduleKind::smooth:
    require(2 * a - 4 * b > 0.0 && 2 * a - 4 * b < 1.0, "smooth schedule needs 2*alpha - 4*beta in (0, 1)");
    break;
  case ScheduleKind::nonsmooth:
    require(3 * b > 0.0 && 3 * b < a, "nonsmooth schedule needs 0 < 3*beta < alpha < 1");
    break;
  case ScheduleKind::free: break;
  }
}

Schedule Schedule::theorem_rate(std::int64_t d, double lambda, double rho)
{
  ScheduleParams p;
  p.alpha = 2.0 / 3.0;
  p.beta = 1.0 / 6.0;
  p.eta0 = std::pow(double(d), -2.0 / 3.0);
  p.delta0 = std::cbrt(double(d));
  p.lambda = lambda;
  p.rho = rho;
  return Schedule(p, ScheduleKind::smooth);
}

Schedule Schedule::nonsmooth(double eta0, double delta0, double lambda, double rho)
{
  ScheduleParams p;
  p.alpha = 3.0 / 4.0;
  p.beta = 1.0 / 6.0;
  p.eta0 = eta0;
  p.delta0 = delta0;
  p.lambda = lambda;
  p.rho = rho;
  return Schedule(p, ScheduleKind::nonsmooth);
}

StepSizes Schedule::at(std::int64_t k) const
{
  if (k < 0) { throw InvalidArgument("Schedule::at: epoch index must be >= 0"); }
  double const base = 1.0 + double(k);
  double const eta = params_.eta0 / std::pow(base, params_.alpha);
  double const delta = params_.delta0 / std::pow(base, params_.beta);
  // Products that land within rounding of an integer (2 ln 8 / ln 2) are not bumped up.
  double const raw = tau0_ * std::log(base);
  double const len = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return {eta, delta, std::max<std::int64_t>(1, std::int64_t(len))};
}

std::int64_t Schedule::total_samples(std::int64_t epochs) const
{
  std::int64_t s = 0;
  for (std::int64_t k = 0; k < epochs; ++k) {
    s += at(k).tau;
  }
  return s;
}

} // namespace dfol
