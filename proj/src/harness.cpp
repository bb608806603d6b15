#include "dfol/harness.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace dfol {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double const kNaN = std::numeric_limits<double>::quiet_NaN();

void append_real(std::string &out, double v)
{
  if (!std::isnan(v)) { out += format_real(v); }
}

void write_file(fs::path const &path, std::string const &bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) { throw IoError("cannot open " + path.string() + " for writing"); }
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) { throw IoError("failed writing " + path.string()); }
}

std::int64_t stride_for(std::int64_t epochs, std::int64_t max_rows)
{
  if (max_rows <= 0) { return 1; }
  return std::max<std::int64_t>(1, (epochs + 1 + max_rows - 1) / max_rows);
}

bool keep_row(std::int64_t epoch, std::int64_t last, std::int64_t stride)
{
  return epoch % stride == 0 || epoch == last;
}

std::string utc_now()
{
  auto const  now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm     tm{};
  char        buf[32];
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Welford accumulation of one metric across trials at one epoch.
struct Running
{
  std::int64_t n = 0;
  double       mean = 0.0;
  double       m2 = 0.0;

  void add(double x)
  {
    ++n;
    double const d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }

  std::optional<MeanStd> result(std::int64_t trials) const
  {
    if (n == 0 || n != trials) { return std::nullopt; }
    return MeanStd{mean, n > 1 ? std::sqrt(m2 / double(n - 1)) : 0.0};
  }
};

} // namespace

std::string format_real(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TrialSeries TrialSeries::from_trace(RunTrace const &trace)
{
  TrialSeries s;
  auto const  n = trace.records.size();
  s.epoch.reserve(n);
  s.samples.reserve(n);
  s.risk.reserve(n);
  s.grad_norm_sq.reserve(n);
  s.run_avg_grad_norm_sq.reserve(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto const &r = trace.records[i];
    s.epoch.push_back(r.epoch);
    s.samples.push_back(r.samples);
    s.risk.push_back(r.risk.value_or(kNaN));
    double const g = r.grad_norm_sq.value_or(kNaN);
    s.grad_norm_sq.push_back(g);
    sum += g;
    s.run_avg_grad_norm_sq.push_back(sum / double(i + 1));
  }
  return s;
}

TrialSeries TrialSeries::thinned(std::int64_t stride) const
{
  if (stride <= 1) { return *this; }
  TrialSeries        s;
  std::int64_t const last = epoch.empty() ? 0 : epoch.back();
  for (std::size_t i = 0; i < epoch.size(); ++i) {
    if (!keep_row(epoch[i], last, stride)) { continue; }
    s.epoch.push_back(epoch[i]);
    s.samples.push_back(samples[i]);
    s.risk.push_back(risk[i]);
    s.grad_norm_sq.push_back(grad_norm_sq[i]);
    s.run_avg_grad_norm_sq.push_back(run_avg_grad_norm_sq[i]);
  }
  return s;
}

AggregateCurve aggregate(std::span<TrialSeries const> series)
{
  if (series.empty()) { throw InvalidArgument("aggregate: no traces"); }
  auto const &ref = series.front();
  for (auto const &s : series) {
    if (s.epoch != ref.epoch) { throw InvalidArgument("aggregate: traces have misaligned epoch grids"); }
  }
  std::int64_t const trials = std::int64_t(series.size());
  AggregateCurve     curve;
  curve.points.reserve(ref.epoch.size());
  for (std::size_t i = 0; i < ref.epoch.size(); ++i) {
    Running samples, risk, grad, avg;
    for (auto const &s : series) {
      samples.add(double(s.samples[i]));
      if (!std::isnan(s.risk[i])) { risk.add(s.risk[i]); }
      if (!std::isnan(s.grad_norm_sq[i])) { grad.add(s.grad_norm_sq[i]); }
      if (!std::isnan(s.run_avg_grad_norm_sq[i])) { avg.add(s.run_avg_grad_norm_sq[i]); }
    }
    curve.points.push_back({ref.epoch[i], samples.mean, risk.result(trials), grad.result(trials), avg.result(trials), trials});
  }
  return curve;
}

AggregateCurve aggregate(std::span<RunTrace const> traces)
{
  std::vector<TrialSeries> series;
  series.reserve(traces.size());
  for (auto const &t : traces) {
    series.push_back(TrialSeries::from_trace(t));
  }
  return aggregate(std::span<TrialSeries const>(series));
}

std::string trace_csv(RunTrace const &trace, std::int64_t trial, bool record_theta, std::int64_t stride)
{
  std::string  out = "trial,epoch,samples_cum,risk,grad_norm_sq,run_avg_grad_norm_sq";
  Eigen::Index d = trace.records.empty() ? 0 : trace.records.front().theta.size();
  if (record_theta) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out += ",theta_" + std::to_string(i);
    }
  }
  out += '\n';
  auto const         series = TrialSeries::from_trace(trace);
  std::int64_t const last = series.epoch.empty() ? 0 : series.epoch.back();
  for (std::size_t i = 0; i < series.epoch.size(); ++i) {
    if (!keep_row(series.epoch[i], last, stride)) { continue; }
    out += std::to_string(trial) + ',' + std::to_string(series.epoch[i]) + ',' + std::to_string(series.samples[i]) + ',';
    append_real(out, series.risk[i]);
    out += ',';
    append_real(out, series.grad_norm_sq[i]);
    out += ',';
    append_real(out, series.run_avg_grad_norm_sq[i]);
    if (record_theta) {
      for (Eigen::Index j = 0; j < d; ++j) {
        out += ',' + format_real(trace.records[i].theta[j]);
      }
    }
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(AggregateCurve const &curve)
{
  std::string out = "epoch,samples_mean,risk_mean,risk_std,grad_norm_sq_mean,grad_norm_sq_std,"
                    "run_avg_grad_norm_sq_mean,run_avg_grad_norm_sq_std,trials\n";
  auto cell = [&](std::optional<MeanStd> const &m) {
    if (m) {
      out += format_real(m->mean) + ',' + format_real(m->std);
    } else {
      out += ',';
    }
  };
  for (auto const &p : curve.points) {
    out += std::to_string(p.epoch) + ',' + format_real(p.samples) + ',';
    cell(p.risk);
    out += ',';
    cell(p.grad_norm_sq);
    out += ',';
    cell(p.run_avg_grad_norm_sq);
    out += ',' + std::to_string(p.trials) + '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int  len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static char const hex[] = "0123456789abcdef";
  std::string       out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

bool ExperimentResult::all_diverged() const
{
  for (auto const &a : algorithms) {
    if (std::int64_t(a.diverged_trials.size()) < trials) { return false; }
  }
  return !algorithms.empty();
}

AlgorithmResult const &ExperimentResult::find(std::string const &label) const
{
  for (auto const &a : algorithms) {
    if (a.label == label) { return a; }
  }
  throw InvalidArgument("no algorithm labelled '" + label + "'");
}

namespace {

struct TrialOutcome
{
  bool                         diverged = false;
  TrialSeries                  series;
  VectorXd                     final_theta;
  VectorXd                     output_theta;
  fs::path                     file;
  std::string                  checksum;
};

TrialOutcome run_trial(Environment const &env, AlgoConfig const &algo, ExperimentConfig const &cfg, std::int64_t trial,
                       fs::path const &dir)
{
  TrialOutcome out;
  Rng          rng(cfg.base_seed + std::uint64_t(trial));
  RunTrace     trace;
  try {
    trace = run_algorithm(env, algo, rng);
  } catch (Diverged &e) {
    out.diverged = true;
    trace = std::move(e.partial);
  }
  char name[32];
  std::snprintf(name, sizeof name, "trial_%03lld.csv", static_cast<long long>(trial));
  out.file = dir / name;
  std::int64_t const stride = stride_for(algo.epochs, cfg.max_rows);
  std::string const  csv = trace_csv(trace, trial, cfg.record_theta, stride);
  write_file(out.file, csv);
  out.checksum = sha256_hex(csv);
  if (!out.diverged) {
    out.series = TrialSeries::from_trace(trace).thinned(stride);
    out.final_theta = trace.records.back().theta;
    out.output_theta = trace.output_theta;
  }
  return out;
}

} // namespace

ExperimentResult run_experiment(ExperimentConfig const &cfg, RunOptions const &opts)
{
  auto const env = make_environment(cfg.environment);
  fs::path const root = opts.output_dir.value_or(fs::path(cfg.output_dir));
  int const      workers = std::max(1, opts.workers.value_or(cfg.workers));

  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) { throw IoError("cannot create output directory " + root.string() + ": " + ec.message()); }

  ExperimentResult result;
  result.trials = cfg.trials;
  json manifest_algos = json::array();

  for (auto const &spec : cfg.algorithms) {
    AlgoConfig const algo = cfg.algo_config(spec, *env);
    fs::path const   dir = root / spec.label;
    fs::create_directories(dir, ec);
    if (ec) { throw IoError("cannot create output directory " + dir.string() + ": " + ec.message()); }

    std::vector<TrialOutcome> outcomes(std::size_t(cfg.trials));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr        failure;
    std::mutex                failure_lock;
    auto                      worker = [&] {
      for (std::int64_t t = next++; t < cfg.trials; t = next++) {
        try {
          outcomes[std::size_t(t)] = run_trial(*env, algo, cfg, t, dir);
        } catch (...) {
          std::lock_guard lock(failure_lock);
          if (!failure) { failure = std::current_exception(); }
        }
      }
    };
    int const n_threads = int(std::min<std::int64_t>(workers, cfg.trials));
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int i = 0; i < n_threads; ++i) {
        pool.emplace_back(worker);
      }
    }
    if (failure) { std::rethrow_exception(failure); }

    AlgorithmResult ar;
    ar.label = spec.label;
    ar.algorithm = algo.algorithm;
    ar.epochs = algo.epochs;
    ar.planned_samples = planned_samples(algo);
    std::vector<TrialSeries> survivors;
    json                     files = json::array();
    for (std::int64_t t = 0; t < cfg.trials; ++t) {
      auto &o = outcomes[std::size_t(t)];
      ar.files.push_back(o.file);
      files.push_back({{"path", fs::relative(o.file, root).generic_string()}, {"sha256", o.checksum}});
      if (o.diverged) {
        ar.diverged_trials.push_back(t);
        continue;
      }
      survivors.push_back(std::move(o.series));
      ar.final_theta.push_back(std::move(o.final_theta));
      ar.output_theta.push_back(std::move(o.output_theta));
    }
    std::int64_t const stride = stride_for(algo.epochs, cfg.max_rows);
    if (!survivors.empty()) {
      ar.curve = aggregate(std::span<TrialSeries const>(survivors));
      fs::path const    agg = dir / "aggregate.csv";
      std::string const csv = aggregate_csv(ar.curve);
      write_file(agg, csv);
      ar.files.push_back(agg);
      files.push_back({{"path", fs::relative(agg, root).generic_string()}, {"sha256", sha256_hex(csv)}});
    }

    auto const &s = algo.schedule;
    manifest_algos.push_back({
      {"label", spec.label},
      {"algorithm", to_string(algo.algorithm)},
      {"epochs", algo.epochs},
      {"samples_per_trial", ar.planned_samples},
      {"row_stride", stride},
      {"schedule",
       {{"kind", to_string(s.kind())},
        {"alpha", s.alpha()},
        {"beta", s.beta()},
        {"eta0", s.eta0()},
        {"delta0", s.delta0()},
        {"tau0", s.tau0()},
        {"lambda", s.lambda()},
        {"rho", s.rho()}}},
      {"burn_in_tau", algo.burn_in_tau ? json(*algo.burn_in_tau) : json(nullptr)},
      {"trials", cfg.trials},
      {"survived", cfg.trials - std::int64_t(ar.diverged_trials.size())},
      {"diverged", ar.diverged_trials.size()},
      {"diverged_trials", ar.diverged_trials},
      {"files", files},
    });
    result.algorithms.push_back(std::move(ar));
  }

  json seeds = json::array();
  for (std::int64_t t = 0; t < cfg.trials; ++t) {
    seeds.push_back(cfg.base_seed + std::uint64_t(t));
  }
  json const manifest = {
    {"name", cfg.name},
    {"version", cfg.version},
    {"created_utc", utc_now()},
    {"config_sha256", sha256_hex(cfg.canonical_json)},
    {"config", json::parse(cfg.canonical_json)},
    {"environment", env->name()},
    {"seed_rule", "trial seed = base_seed + trial_index, unsigned 64-bit little-endian"},
    {"base_seed", cfg.base_seed},
    {"trial_seeds", seeds},
    {"csv", {{"float_digits", 17}, {"line_ending", "LF"}, {"encoding", "UTF-8"}}},
    {"algorithms", manifest_algos},
  };
  result.manifest = root / "manifest.json";
  write_file(result.manifest, manifest.dump(2) + "\n");
  return result;
}

std::vector<DiagResult> run_diagnostics(ExperimentConfig const &cfg)
{
  auto const              env = make_environment(cfg.environment);
  std::vector<DiagResult> out;
  for (std::size_t i = 0; i < cfg.diagnostics.size(); ++i) {
    auto const &spec = cfg.diagnostics[i];
    Rng         rng(cfg.base_seed + i);
    out.push_back({spec, estimator_moments(*env, spec.theta, spec.delta, spec.n, spec.estimator, rng)});
  }
  return out;
}

std::string diag_csv(std::span<DiagResult const> results)
{
  Eigen::Index d = 0;
  for (auto const &r : results) {
    d = std::max(d, r.report.mean.size());
  }
  std::string out = "index,estimator,delta,n,cov_trace,second_moment";
  for (Eigen::Index i = 0; i < d; ++i) {
    out += ",mean_" + std::to_string(i);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    out += ",se_" + std::to_string(i);
  }
  out += '\n';
  for (std::size_t k = 0; k < results.size(); ++k) {
    auto const &r = results[k];
    out += std::to_string(k) + ',' + to_string(r.spec.estimator) + ',' + format_real(r.spec.delta) + ',' +
           std::to_string(r.report.sample_count) + ',' + format_real(r.report.cov_trace) + ',' +
           format_real(r.report.second_moment());
    for (Eigen::Index i = 0; i < d; ++i) {
      out += ',' + format_real(r.report.mean[i]);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      out += ',' + format_real(r.report.se[i]);
    }
    out += '\n';
  }
  return out;
}

} // namespace dfol
