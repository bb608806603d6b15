#include "dfol/optim.hpp"

#include <cmath>

namespace dfol {

std::string to_string(Algorithm a)
{
  switch (a) {
  case Algorithm::dfo_lambda: return "dfo_lambda";
  case Algorithm::dfo_gd: return "dfo_gd";
  case Algorithm::sgd_gd: return "sgd_gd";
  case Algorithm::two_point_I: return "two_point_I";
  case Algorithm::two_point_II: return "two_point_II";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_string(std::string const &name)
{
  for (auto a : {Algorithm::dfo_lambda, Algorithm::dfo_gd, Algorithm::sgd_gd, Algorithm::two_point_I,
                 Algorithm::two_point_II}) {
    if (to_string(a) == name) { return a; }
  }
  return std::nullopt;
}

Diverged::Diverged(std::int64_t e, RunTrace p)
  : Error("optimizer diverged at epoch " + std::to_string(e))
  , epoch(e)
  , partial(std::move(p))
{
}

namespace {

// Shared bookkeeping: iterate, chain state, sample counter and the per-epoch records.
class Run
{
public:
  Run(Environment const &env, AlgoConfig const &cfg, Rng &rng)
    : env_(env)
    , cfg_(cfg)
    , rng_(rng)
  {
    if (cfg.epochs < 1) { throw InvalidArgument("AlgoConfig: epochs must be >= 1"); }
    if (cfg.theta0.size() != env.dim()) {
      throw InvalidArgument("AlgoConfig: theta0 has dimension " + std::to_string(cfg.theta0.size()) +
                            ", environment expects " + std::to_string(env.dim()));
    }
    if (cfg.burn_in_tau && *cfg.burn_in_tau < 1) { throw InvalidArgument("AlgoConfig: burn_in_tau must be >= 1"); }
    if (!cfg.theta0.allFinite()) { throw InvalidArgument("AlgoConfig: theta0 must be finite"); }
    theta = cfg.theta0;
    z = env.initial_sample(theta, rng);
    trace_.records.reserve(std::size_t(cfg.epochs) + 1);
  }

  Eigen::Index dim() const { return theta.size(); }

  void record(std::int64_t k)
  {
    EpochRecord r{k, samples, theta, std::nullopt, std::nullopt};
    if (env_.has_exact_risk()) {
      r.risk = env_.exact_risk(theta);
      r.grad_norm_sq = env_.exact_risk_grad(theta).squaredNorm();
    }
    trace_.records.push_back(std::move(r));
  }

  void step(VectorXd const &deployed)
  {
    env_.advance(z, deployed, rng_);
    ++samples;
  }

  void check(std::int64_t k)
  {
    if (!theta.allFinite() || theta.norm() > kDivergenceNorm) { throw Diverged(k, std::move(trace_)); }
  }

  std::int64_t burn_in(StepSizes const &s) const { return cfg_.burn_in_tau ? *cfg_.burn_in_tau : s.tau; }

  RunTrace finish()
  {
    record(cfg_.epochs);
    auto const s = rng_.index(std::uint64_t(cfg_.epochs) + 1);
    trace_.output_index = std::int64_t(s);
    trace_.output_theta = trace_.records[s].theta;
    return std::move(trace_);
  }

  VectorXd     theta;
  VectorXd     z;
  std::int64_t samples = 0;

private:
  Environment const &env_;
  AlgoConfig const  &cfg_;
  Rng               &rng_;
  RunTrace           trace_;
};

// Epochs of `fixed_tau` (or tau_k) greedy one-point steps along a shared direction.
RunTrace one_point_epochs(Environment const &env, AlgoConfig const &cfg, Rng &rng, std::optional<std::int64_t> fixed_tau)
{
  Run          run(env, cfg, rng);
  double const lambda = cfg.schedule.lambda();
  VectorXd     deployed(run.dim());
  for (std::int64_t k = 0; k < cfg.epochs; ++k) {
    run.record(k);
    auto const         s = cfg.schedule.at(k);
    std::int64_t const tau = fixed_tau ? *fixed_tau : s.tau;
    auto const         u = sample_unit_sphere(run.dim(), rng);
    for (std::int64_t m = 1; m <= tau; ++m) {
      deployed = run.theta + s.delta * u.vector();
      run.step(deployed);
      double const w = forgetting_weight(lambda, tau, m);
      if (w == 0.0) { continue; }
      double const l = env.loss(deployed, run.z);
      run.theta -= (s.eta * w) * one_point_gradient(s.delta, l, u);
      run.check(k);
    }
  }
  return run.finish();
}

} // namespace

RunTrace dfo_lambda(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  return one_point_epochs(env, cfg, rng, std::nullopt);
}

RunTrace dfo_gd(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  return one_point_epochs(env, cfg, rng, 1);
}

RunTrace sgd_gd(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  if (!env.has_loss_grad()) { throw UnsupportedAlgorithm("sgd_gd: environment " + env.name() + " has no loss gradient"); }
  Run run(env, cfg, rng);
  for (std::int64_t k = 0; k < cfg.epochs; ++k) {
    run.record(k);
    auto const s = cfg.schedule.at(k);
    run.step(run.theta);
    run.theta -= s.eta * env.loss_grad_theta(run.theta, run.z);
    run.check(k);
  }
  return run.finish();
}

RunTrace two_point_I(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  Run run(env, cfg, rng);
  for (std::int64_t k = 0; k < cfg.epochs; ++k) {
    run.record(k);
    auto const     s = cfg.schedule.at(k);
    auto const     u = sample_unit_sphere(run.dim(), rng);
    VectorXd const deployed = run.theta + s.delta * u.vector();
    for (std::int64_t m = 0, n = run.burn_in(s); m < n; ++m) {
      run.step(deployed);
    }
    double const diff = env.loss(deployed, run.z) - env.loss(run.theta, run.z);
    run.theta -= s.eta * one_point_gradient(s.delta, diff, u);
    run.check(k);
  }
  return run.finish();
}

RunTrace two_point_II(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  Run run(env, cfg, rng);
  for (std::int64_t k = 0; k < cfg.epochs; ++k) {
    run.record(k);
    auto const         s = cfg.schedule.at(k);
    std::int64_t const n = run.burn_in(s);
    auto const         u = sample_unit_sphere(run.dim(), rng);
    VectorXd const     deployed = run.theta + s.delta * u.vector();
    for (std::int64_t m = 0; m < n; ++m) {
      run.step(deployed);
    }
    double const perturbed = env.loss(deployed, run.z);
    for (std::int64_t m = 0; m < n; ++m) {
      run.step(run.theta);
    }
    double const base = env.loss(run.theta, run.z);
    run.theta -= s.eta * one_point_gradient(s.delta, perturbed - base, u);
    run.check(k);
  }
  return run.finish();
}

RunTrace run_algorithm(Environment const &env, AlgoConfig const &cfg, Rng &rng)
{
  switch (cfg.algorithm) {
  case Algorithm::dfo_lambda: return dfo_lambda(env, cfg, rng);
  case Algorithm::dfo_gd: return dfo_gd(env, cfg, rng);
  case Algorithm::sgd_gd: return sgd_gd(env, cfg, rng);
  case Algorithm::two_point_I: return two_point_I(env, cfg, rng);
  case Algorithm::two_point_II: return two_point_II(env, cfg, rng);
  }
  throw UnsupportedAlgorithm("unknown algorithm");
}

std::int64_t planned_samples(AlgoConfig const &cfg)
{
  switch (cfg.algorithm) {
  case Algorithm::dfo_lambda: return cfg.schedule.total_samples(cfg.epochs);
  case Algorithm::dfo_gd:
  case Algorithm::sgd_gd: return cfg.epochs;
  case Algorithm::two_point_I:
  case Algorithm::two_point_II: {
    std::int64_t const per = cfg.algorithm == Algorithm::two_point_II ? 2 : 1;
    if (cfg.burn_in_tau) { return per * *cfg.burn_in_tau * cfg.epochs; }
    return per * cfg.schedule.total_samples(cfg.epochs);
  }
  }
  return 0;
}

} // namespace dfol
