#pragma once

#include "diag.hpp"
#include "envs.hpp"
#include "optim.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfol {

inline constexpr int kConfigVersion = 1;

struct EnvSpec
{
  std::string                 type; // ar_quartic | ar_pricing | ar_regression
  std::optional<Eigen::Index> dim;
  std::optional<double>       gamma;
  std::optional<double>       sigma;
  std::optional<double>       sigma1;
  std::optional<double>       sigma2;
  std::optional<double>       kappa;
  std::optional<VectorXd>     mu0;
  std::optional<VectorXd>     theta_star0;
  std::optional<double>       rho; // overrides the environment's mixing-rate estimate
};

std::unique_ptr<Environment> make_environment(EnvSpec const &spec);

// Partial schedule description. Later layers override earlier ones field by field.
struct ScheduleSpec
{
  std::optional<std::string>  preset; // theorem_rate | nonsmooth
  std::optional<ScheduleKind> kind;
  std::optional<double>       alpha;
  std::optional<double>       beta;
  std::optional<double>       eta0;
  std::optional<double>       delta0;
  std::optional<double>       tau0;
  std::optional<double>       lambda;
  std::optional<double>       rho;

  ScheduleSpec overridden_by(ScheduleSpec const &top) const;
  Schedule     build(Eigen::Index d, double env_rho) const;
};

struct AlgoSpec
{
  std::string                 label;
  Algorithm                   algorithm = Algorithm::dfo_lambda;
  ScheduleSpec                schedule; // overrides of the experiment-level schedule
  std::optional<std::int64_t> epochs;
  std::optional<std::int64_t> burn_in_tau;
};

struct DiagSpec
{
  Estimator    estimator = Estimator::one_point;
  VectorXd     theta;
  double       delta = 1.0;
  std::int64_t n = 1000;
};

struct ExperimentConfig
{
  int                     version = kConfigVersion;
  std::string             name;
  EnvSpec                 environment;
  std::optional<VectorXd> theta0; // environment default when unset
  ScheduleSpec            schedule;
  std::vector<AlgoSpec>   algorithms;
  std::vector<DiagSpec>   diagnostics;
  std::int64_t            trials = 1;
  std::uint64_t           base_seed = 0;
  std::int64_t            epochs = 1;
  std::string             output_dir = "out";
  bool                    record_theta = true;
  std::int64_t            max_rows = 0; // CSV rows per trace; 0 keeps every epoch
  int                     workers = 1;

  std::string canonical_json; // normalized dump of the parsed document

  VectorXd   initial_theta(Environment const &env) const;
  AlgoConfig algo_config(AlgoSpec const &spec, Environment const &env) const;
};

// Parses and validates a config document. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(std::filesystem::path const &path);

std::vector<std::string> preset_names();
// Pretty-printed JSON of a built-in experiment; throws ConfigError for unknown names.
std::string preset_json(std::string const &name);

} // namespace dfol
