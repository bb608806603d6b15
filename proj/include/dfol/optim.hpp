#pragma once

#include "envs.hpp"
#include "schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dfol {

enum class Algorithm
{
  dfo_lambda,   // one-point estimator, epochs of tau_k steps, lambda-weighted accumulation
  dfo_gd,       // one-point estimator, one step per epoch
  sgd_gd,       // stochastic gradient of the loss at the deployed model
  two_point_I,  // shared sample for both loss queries
  two_point_II, // independent burnt-in samples at theta + delta u and theta
};

std::string              to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(std::string const &name);

struct AlgoConfig
{
  Algorithm    algorithm = Algorithm::dfo_lambda;
  Schedule     schedule{ScheduleParams{}};
  std::int64_t epochs = 1;
  VectorXd     theta0;
  // Burn-in length of the two-point estimators; tau_k from the schedule when unset.
  std::optional<std::int64_t> burn_in_tau;
};

struct EpochRecord
{
  std::int64_t          epoch;
  std::int64_t          samples; // kernel steps taken before theta_k
  VectorXd              theta;
  std::optional<double> risk;
  std::optional<double> grad_norm_sq;
};

struct RunTrace
{
  std::vector<EpochRecord> records; // epochs 0..T
  VectorXd                 output_theta;
  std::int64_t             output_index = 0;

  std::int64_t total_samples() const { return records.empty() ? 0 : records.back().samples; }
};

// Iterates with |theta| above this are treated as divergence.
inline constexpr double kDivergenceNorm = 1e8;

struct Diverged : Error
{
  Diverged(std::int64_t epoch, RunTrace partial);

  std::int64_t epoch;
  RunTrace     partial; // records up to the last finite iterate
};

RunTrace dfo_lambda(Environment const &env, AlgoConfig const &cfg, Rng &rng);
RunTrace dfo_gd(Environment const &env, AlgoConfig const &cfg, Rng &rng);
RunTrace sgd_gd(Environment const &env, AlgoConfig const &cfg, Rng &rng);
RunTrace two_point_I(Environment const &env, AlgoConfig const &cfg, Rng &rng);
RunTrace two_point_II(Environment const &env, AlgoConfig const &cfg, Rng &rng);

// Dispatches on cfg.algorithm.
RunTrace run_algorithm(Environment const &env, AlgoConfig const &cfg, Rng &rng);

// Kernel steps consumed by cfg for its configured epochs (independent of randomness).
std::int64_t planned_samples(AlgoConfig const &cfg);

} // namespace dfol
