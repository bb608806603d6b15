#include "dfol/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dfol {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string const &field, std::string const &what)
{
  throw ConfigError("config field '" + field + "': " + what);
}

std::string join(std::string const &parent, std::string const &key)
{
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(json const &obj, std::string const &path, std::set<std::string> const &known)
{
  for (auto const &[key, _] : obj.items()) {
    if (!known.contains(key)) { fail(join(path, key), "unknown field"); }
  }
}

json const &require_object(json const &j, std::string const &path)
{
  if (!j.is_object()) { fail(path, "expected an object"); }
  return j;
}

std::optional<double> opt_real(json const &obj, std::string const &key, std::string const &path)
{
  if (!obj.contains(key)) { return std::nullopt; }
  auto const &v = obj.at(key);
  if (!v.is_number()) { fail(join(path, key), "expected a number"); }
  double const x = v.get<double>();
  if (!std::isfinite(x)) { fail(join(path, key), "must be finite"); }
  return x;
}

std::optional<std::int64_t> opt_int(json const &obj, std::string const &key, std::string const &path)
{
  if (!obj.contains(key)) { return std::nullopt; }
  auto const &v = obj.at(key);
  if (!v.is_number_integer()) { fail(join(path, key), "expected an integer"); }
  return v.get<std::int64_t>();
}

std::optional<std::string> opt_string(json const &obj, std::string const &key, std::string const &path)
{
  if (!obj.contains(key)) { return std::nullopt; }
  auto const &v = obj.at(key);
  if (!v.is_string()) { fail(join(path, key), "expected a string"); }
  return v.get<std::string>();
}

std::optional<VectorXd> opt_vector(json const &obj, std::string const &key, std::string const &path)
{
  if (!obj.contains(key)) { return std::nullopt; }
  auto const &v = obj.at(key);
  if (!v.is_array() || v.empty()) { fail(join(path, key), "expected a non-empty array of numbers"); }
  VectorXd out(Eigen::Index(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) { fail(join(path, key), "expected a non-empty array of numbers"); }
    out[Eigen::Index(i)] = v[i].get<double>();
    if (!std::isfinite(out[Eigen::Index(i)])) { fail(join(path, key), "entries must be finite"); }
  }
  return out;
}

EnvSpec parse_env(json const &j, std::string const &path)
{
  require_object(j, path);
  reject_unknown(j, path, {"type", "dim", "gamma", "sigma", "sigma1", "sigma2", "kappa", "mu0", "theta_star0", "rho"});
  EnvSpec s;
  auto    type = opt_string(j, "type", path);
  if (!type) { fail(join(path, "type"), "missing"); }
  if (*type != "ar_quartic" && *type != "ar_pricing" && *type != "ar_regression") {
    fail(join(path, "type"), "unknown environment '" + *type + "'");
  }
  s.type = *type;
  if (auto d = opt_int(j, "dim", path)) {
    if (*d < 1) { fail(join(path, "dim"), "must be >= 1"); }
    s.dim = Eigen::Index(*d);
  }
  s.gamma = opt_real(j, "gamma", path);
  s.sigma = opt_real(j, "sigma", path);
  s.sigma1 = opt_real(j, "sigma1", path);
  s.sigma2 = opt_real(j, "sigma2", path);
  s.kappa = opt_real(j, "kappa", path);
  s.mu0 = opt_vector(j, "mu0", path);
  s.theta_star0 = opt_vector(j, "theta_star0", path);
  s.rho = opt_real(j, "rho", path);
  return s;
}

ScheduleSpec parse_schedule(json const &j, std::string const &path)
{
  require_object(j, path);
  reject_unknown(j, path, {"preset", "kind", "alpha", "beta", "eta0", "delta0", "tau0", "lambda", "rho"});
  ScheduleSpec s;
  s.preset = opt_string(j, "preset", path);
  if (s.preset && *s.preset != "theorem_rate" && *s.preset != "nonsmooth") {
    fail(join(path, "preset"), "unknown schedule preset '" + *s.preset + "'");
  }
  if (auto k = opt_string(j, "kind", path)) {
    s.kind = schedule_kind_from_string(*k);
    if (!s.kind) { fail(join(path, "kind"), "unknown schedule kind '" + *k + "'"); }
  }
  s.alpha = opt_real(j, "alpha", path);
  s.beta = opt_real(j, "beta", path);
  s.eta0 = opt_real(j, "eta0", path);
  s.delta0 = opt_real(j, "delta0", path);
  s.tau0 = opt_real(j, "tau0", path);
  s.lambda = opt_real(j, "lambda", path);
  s.rho = opt_real(j, "rho", path);
  return s;
}

AlgoSpec parse_algo(json const &j, std::string const &path)
{
  require_object(j, path);
  reject_unknown(j, path, {"label", "algorithm", "schedule", "epochs", "burn_in_tau"});
  AlgoSpec s;
  auto     tag = opt_string(j, "algorithm", path);
  if (!tag) { fail(join(path, "algorithm"), "missing"); }
  auto a = algorithm_from_string(*tag);
  if (!a) { fail(join(path, "algorithm"), "unknown algorithm '" + *tag + "'"); }
  s.algorithm = *a;
  s.label = opt_string(j, "label", path).value_or(*tag);
  if (s.label.empty() || s.label.find_first_of("/\\") != std::string::npos || s.label == "." || s.label == "..") {
    fail(join(path, "label"), "must be a non-empty file-name-safe string");
  }
  if (j.contains("schedule")) { s.schedule = parse_schedule(j.at("schedule"), join(path, "schedule")); }
  s.epochs = opt_int(j, "epochs", path);
  if (s.epochs && *s.epochs < 1) { fail(join(path, "epochs"), "must be >= 1"); }
  s.burn_in_tau = opt_int(j, "burn_in_tau", path);
  if (s.burn_in_tau && *s.burn_in_tau < 1) { fail(join(path, "burn_in_tau"), "must be >= 1"); }
  return s;
}

DiagSpec parse_diag(json const &j, std::string const &path)
{
  require_object(j, path);
  reject_unknown(j, path, {"estimator", "theta", "delta", "n"});
  DiagSpec s;
  auto     tag = opt_string(j, "estimator", path).value_or("one_point");
  auto     e = estimator_from_string(tag);
  if (!e) { fail(join(path, "estimator"), "unknown estimator '" + tag + "'"); }
  s.estimator = *e;
  auto theta = opt_vector(j, "theta", path);
  if (!theta) { fail(join(path, "theta"), "missing"); }
  s.theta = *theta;
  s.delta = opt_real(j, "delta", path).value_or(1.0);
  if (!(s.delta > 0.0)) { fail(join(path, "delta"), "must be > 0"); }
  s.n = opt_int(j, "n", path).value_or(1000);
  if (s.n < 1) { fail(join(path, "n"), "must be >= 1"); }
  return s;
}

template <typename T>
void merge(std::optional<T> &dst, std::optional<T> const &src)
{
  if (src) { dst = src; }
}

} // namespace

// ---------------------------------------------------------------------------------------------

std::unique_ptr<Environment> make_environment(EnvSpec const &s)
{
  if (s.type == "ar_quartic") {
    return std::make_unique<ArScalarQuartic>(s.gamma.value_or(0.5), s.sigma.value_or(1.0));
  }
  if (s.type == "ar_pricing") {
    Eigen::Index const d = s.mu0 ? s.mu0->size() : s.dim.value_or(5);
    VectorXd           mu0 = s.mu0 ? *s.mu0 : ArPricing::default_mu0(d);
    if (s.dim && *s.dim != mu0.size()) { throw ConfigError("config field 'environment.mu0': length differs from dim"); }
    return std::make_unique<ArPricing>(s.gamma.value_or(0.1), s.sigma.value_or(1.0), s.kappa.value_or(0.5), std::move(mu0));
  }
  if (s.type == "ar_regression") {
    Eigen::Index const d = s.theta_star0 ? s.theta_star0->size() : s.dim.value_or(5);
    VectorXd           w0 = s.theta_star0 ? *s.theta_star0 : ArRegression::default_w0(d);
    if (s.dim && *s.dim != w0.size()) {
      throw ConfigError("config field 'environment.theta_star0': length differs from dim");
    }
    double const kappa = s.kappa.value_or(1.0 / w0.norm());
    return std::make_unique<ArRegression>(s.gamma.value_or(0.25), s.sigma1.value_or(1.0), s.sigma2.value_or(1.0), kappa,
                                          std::move(w0));
  }
  throw ConfigError("config field 'environment.type': unknown environment '" + s.type + "'");
}

ScheduleSpec ScheduleSpec::overridden_by(ScheduleSpec const &top) const
{
  ScheduleSpec out = *this;
  if (top.preset) {
    // A preset on the overriding layer resets the constants it defines.
    out.alpha.reset();
    out.beta.reset();
    out.eta0.reset();
    out.delta0.reset();
    out.kind.reset();
  }
  merge(out.preset, top.preset);
  merge(out.kind, top.kind);
  merge(out.alpha, top.alpha);
  merge(out.beta, top.beta);
  merge(out.eta0, top.eta0);
  merge(out.delta0, top.delta0);
  merge(out.tau0, top.tau0);
  merge(out.lambda, top.lambda);
  merge(out.rho, top.rho);
  return out;
}

Schedule ScheduleSpec::build(Eigen::Index d, double env_rho) const
{
  ScheduleParams p;
  ScheduleKind   k = ScheduleKind::smooth;
  if (preset == "nonsmooth") {
    p.alpha = 3.0 / 4.0;
    p.beta = 1.0 / 6.0;
    k = ScheduleKind::nonsmooth;
  } else {
    p.alpha = 2.0 / 3.0;
    p.beta = 1.0 / 6.0;
    p.eta0 = std::pow(double(d), -2.0 / 3.0);
    p.delta0 = std::cbrt(double(d));
  }
  p.alpha = alpha.value_or(p.alpha);
  p.beta = beta.value_or(p.beta);
  p.eta0 = eta0.value_or(p.eta0);
  p.delta0 = delta0.value_or(p.delta0);
  p.tau0 = tau0;
  p.lambda = lambda.value_or(0.0);
  p.rho = rho.value_or(env_rho);
  try {
    return Schedule(p, kind.value_or(k));
  } catch (InvalidArgument const &e) {
    throw ConfigError(std::string("config field 'schedule': ") + e.what());
  }
}

VectorXd ExperimentConfig::initial_theta(Environment const &env) const
{
  if (theta0) {
    if (theta0->size() != env.dim()) {
      throw ConfigError("config field 'theta0': length " + std::to_string(theta0->size()) + " differs from dimension " +
                        std::to_string(env.dim()));
    }
    return *theta0;
  }
  if (env.name() == "ar_quartic") { return VectorXd::Constant(1, 6.0); }
  if (env.name() == "ar_pricing") {
    VectorXd t(env.dim());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t[i] = (i % 2 == 0) ? 12.0 : -12.0;
    }
    return t;
  }
  return VectorXd::Zero(env.dim());
}

AlgoConfig ExperimentConfig::algo_config(AlgoSpec const &spec, Environment const &env) const
{
  double const env_rho = environment.rho.value_or(env.mixing_rate());
  AlgoConfig   c;
  c.algorithm = spec.algorithm;
  c.schedule = schedule.overridden_by(spec.schedule).build(env.dim(), env_rho);
  c.epochs = spec.epochs.value_or(epochs);
  c.theta0 = initial_theta(env);
  c.burn_in_tau = spec.burn_in_tau;
  return c;
}

ExperimentConfig parse_config(std::string_view text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (json::parse_error const &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(j, "<root>");
  reject_unknown(j, "", {"version", "name", "environment", "theta0", "schedule", "algorithms", "diagnostics", "trials",
                         "base_seed", "epochs", "output_dir", "record_theta", "max_rows", "workers"});

  ExperimentConfig c;
  auto             version = opt_int(j, "version", "");
  if (!version) { fail("version", "missing"); }
  if (*version != kConfigVersion) { fail("version", "unsupported version " + std::to_string(*version)); }
  c.version = int(*version);
  c.name = opt_string(j, "name", "").value_or("experiment");
  if (!j.contains("environment")) { fail("environment", "missing"); }
  c.environment = parse_env(j.at("environment"), "environment");
  c.theta0 = opt_vector(j, "theta0", "");
  if (j.contains("schedule")) { c.schedule = parse_schedule(j.at("schedule"), "schedule"); }

  if (j.contains("algorithms")) {
    auto const &arr = j.at("algorithms");
    if (!arr.is_array()) { fail("algorithms", "expected an array"); }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto a = parse_algo(arr[i], "algorithms[" + std::to_string(i) + "]");
      if (!labels.insert(a.label).second) { fail("algorithms[" + std::to_string(i) + "].label", "duplicate label"); }
      c.algorithms.push_back(std::move(a));
    }
  }
  if (j.contains("diagnostics")) {
    auto const &arr = j.at("diagnostics");
    if (!arr.is_array()) { fail("diagnostics", "expected an array"); }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.diagnostics.push_back(parse_diag(arr[i], "diagnostics[" + std::to_string(i) + "]"));
    }
  }

  c.trials = opt_int(j, "trials", "").value_or(1);
  if (c.trials < 1) { fail("trials", "must be >= 1"); }
  if (j.contains("base_seed")) {
    auto const &s = j.at("base_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      fail("base_seed", "expected a non-negative 64-bit integer");
    }
    c.base_seed = s.get<std::uint64_t>();
  }
  c.epochs = opt_int(j, "epochs", "").value_or(1);
  if (c.epochs < 1) { fail("epochs", "must be >= 1"); }
  c.output_dir = opt_string(j, "output_dir", "").value_or("out");
  if (j.contains("record_theta")) {
    if (!j.at("record_theta").is_boolean()) { fail("record_theta", "expected a boolean"); }
    c.record_theta = j.at("record_theta").get<bool>();
  }
  c.max_rows = opt_int(j, "max_rows", "").value_or(0);
  if (c.max_rows < 0) { fail("max_rows", "must be >= 0"); }
  c.workers = int(opt_int(j, "workers", "").value_or(1));
  if (c.workers < 1) { fail("workers", "must be >= 1"); }

  // Surface environment/schedule problems now rather than mid-run.
  std::unique_ptr<Environment> env;
  try {
    env = make_environment(c.environment);
  } catch (InvalidArgument const &e) {
    fail("environment", e.what());
  }
  (void)c.initial_theta(*env);
  for (std::size_t i = 0; i < c.algorithms.size(); ++i) {
    try {
      (void)c.algo_config(c.algorithms[i], *env);
    } catch (ConfigError const &e) {
      throw ConfigError("algorithms[" + std::to_string(i) + "]: " + e.what());
    }
  }
  for (std::size_t i = 0; i < c.diagnostics.size(); ++i) {
    if (c.diagnostics[i].theta.size() != env->dim()) {
      fail("diagnostics[" + std::to_string(i) + "].theta", "length differs from the environment dimension");
    }
  }

  c.canonical_json = j.dump();
  return c;
}

ExperimentConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw IoError("cannot read config file " + path.string()); }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// ---------------------------------------------------------------------------------------------
// Built-in experiments

namespace {

// Samples used by 12000 epochs of the quartic dfo_lambda schedule; the one-step baselines get the
// same budget.
constexpr std::int64_t kQuarticBudget = 296454;

json algorithms_block(std::vector<json> entries)
{
  return json(std::move(entries));
}

json quartic_preset()
{
  return {
    {"version", kConfigVersion},
    {"name", "quartic"},
    {"environment", {{"type", "ar_quartic"}, {"gamma", 0.5}, {"sigma", 1.0}}},
    {"theta0", {6.0}},
    {"schedule", {{"preset", "theorem_rate"}, {"eta0", 0.0075}, {"lambda", 0.25}}},
    {"epochs", 12000},
    {"trials", 10},
    {"base_seed", 20230601},
    {"output_dir", "out/quartic"},
    {"record_theta", true},
    {"max_rows", 2000},
    {"algorithms",
     algorithms_block({
       {{"label", "dfo_lambda_0.25"}, {"algorithm", "dfo_lambda"}},
       {{"label", "dfo_lambda_0.5"}, {"algorithm", "dfo_lambda"}, {"schedule", {{"lambda", 0.5}}}},
       {{"label", "dfo_gd"}, {"algorithm", "dfo_gd"}, {"epochs", kQuarticBudget}},
       {{"label", "sgd_gd"}, {"algorithm", "sgd_gd"}, {"epochs", kQuarticBudget}},
       {{"label", "two_point_I"}, {"algorithm", "two_point_I"}},
       {{"label", "two_point_II"}, {"algorithm", "two_point_II"}},
     })},
  };
}

json pricing_preset()
{
  return {
    {"version", kConfigVersion},
    {"name", "pricing"},
    {"environment", {{"type", "ar_pricing"}, {"gamma", 0.1}, {"sigma", 1.0}, {"kappa", 0.5}, {"mu0", {5, -5, -5, 5, -5}}}},
    {"theta0", {12, -12, 12, -12, 12}},
    {"schedule", {{"preset", "theorem_rate"}, {"eta0", 0.02}, {"delta0", 12.0}, {"lambda", 0.5}}},
    {"epochs", 30000},
    {"trials", 10},
    {"base_seed", 20230602},
    {"output_dir", "out/pricing"},
    {"record_theta", true},
    {"max_rows", 2000},
    {"algorithms",
     algorithms_block({
       {{"label", "dfo_lambda"}, {"algorithm", "dfo_lambda"}},
       {{"label", "dfo_gd"}, {"algorithm", "dfo_gd"}, {"epochs", 1000000}},
       {{"label", "sgd_gd"},
        {"algorithm", "sgd_gd"},
        {"epochs", 1000000},
        {"schedule", {{"preset", "theorem_rate"}, {"lambda", 0.5}}}},
     })},
  };
}

json regression_preset()
{
  return {
    {"version", kConfigVersion},
    {"name", "regression"},
    {"environment",
     {{"type", "ar_regression"},
      {"gamma", 0.25},
      {"sigma1", 1.0},
      {"sigma2", 1.0},
      {"theta_star0", {5, -5, 5, -5, 5}}}},
    {"theta0", {0, 0, 0, 0, 0}},
    {"schedule", {{"preset", "theorem_rate"}, {"eta0", 0.0075}, {"delta0", 12.0}, {"lambda", 0.5}}},
    {"epochs", 20000},
    {"trials", 10},
    {"base_seed", 20230603},
    {"output_dir", "out/regression"},
    {"record_theta", true},
    {"max_rows", 2000},
    {"algorithms",
     algorithms_block({
       {{"label", "dfo_lambda"}, {"algorithm", "dfo_lambda"}},
       {{"label", "dfo_gd"}, {"algorithm", "dfo_gd"}, {"epochs", 1000000}},
       {{"label", "sgd_gd"}, {"algorithm", "sgd_gd"}, {"epochs", 1000000}},
     })},
  };
}

} // namespace

std::vector<std::string> preset_names()
{
  return {"quartic", "pricing", "regression"};
}

std::string preset_json(std::string const &name)
{
  if (name == "quartic") { return quartic_preset().dump(2); }
  if (name == "pricing") { return pricing_preset().dump(2); }
  if (name == "regression") { return regression_preset().dump(2); }
  throw ConfigError("unknown preset '" + name + "'");
}

} // namespace dfol
