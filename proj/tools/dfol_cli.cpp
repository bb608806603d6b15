// Command-line front end: run experiments, estimator diagnostics, and built-in presets.

#include "dfol/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAllDiverged = 4;

int cmd_run(std::string const &config, std::string const &out, int workers)
{
  auto              cfg = dfol::load_config(config);
  dfol::RunOptions  opts;
  if (!out.empty()) { opts.output_dir = out; }
  if (workers > 0) { opts.workers = workers; }
  auto const result = dfol::run_experiment(cfg, opts);
  for (auto const &a : result.algorithms) {
    std::cout << a.label << ": " << (result.trials - std::int64_t(a.diverged_trials.size())) << "/" << result.trials
              << " trials, " << a.planned_samples << " samples/trial";
    if (!a.curve.points.empty()) {
      auto const &last = a.curve.points.back();
      if (last.grad_norm_sq) { std::cout << ", final |grad L|^2 " << last.grad_norm_sq->mean; }
      if (last.risk) { std::cout << ", final risk " << last.risk->mean; }
    }
    std::cout << "\n";
  }
  std::cout << "manifest: " << result.manifest.string() << "\n";
  return result.all_diverged() ? kExitAllDiverged : 0;
}

int cmd_diag(std::string const &config, std::string const &out)
{
  auto const cfg = dfol::load_config(config);
  if (cfg.diagnostics.empty()) { throw dfol::ConfigError("config field 'diagnostics': no entries to evaluate"); }
  auto const results = dfol::run_diagnostics(cfg);
  auto const csv = dfol::diag_csv(results);
  if (out.empty()) {
    std::cout << csv;
    return 0;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) { throw dfol::IoError("cannot open " + out + " for writing"); }
  f << csv;
  if (!f) { throw dfol::IoError("failed writing " + out); }
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Derivative-free optimization for decision-dependent Markovian data"};
  app.require_subcommand(1);

  std::string config, out;
  int         workers = 0;

  auto *run = app.add_subcommand("run", "Run a multi-trial experiment from a JSON config");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides output_dir)");
  run->add_option("--workers", workers, "Concurrent trials")->check(CLI::PositiveNumber);

  auto *diag = app.add_subcommand("diag", "Estimator moment diagnostics; CSV to stdout or --out");
  diag->add_option("--config", config, "Config with a 'diagnostics' array")->required();
  diag->add_option("--out", out, "CSV output path");

  auto       *presets = app.add_subcommand("presets", "Built-in experiment configs");
  auto       *list = presets->add_subcommand("list", "List preset names");
  std::string preset;
  auto       *dump = presets->add_subcommand("dump", "Print a preset config");
  dump->add_option("name", preset, "Preset name")->required();
  presets->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) { return cmd_run(config, out, workers); }
    if (*diag) { return cmd_diag(config, out); }
    if (*list) {
      for (auto const &n : dfol::preset_names()) {
        std::cout << n << "\n";
      }
      return 0;
    }
    if (*dump) {
      std::cout << dfol::preset_json(preset) << "\n";
      return 0;
    }
  } catch (dfol::ConfigError const &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (dfol::IoError const &e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
