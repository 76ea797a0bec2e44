// rsmooth: run solver sweeps, fit convergence rates, and replay saved runs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsmooth/experiment.hpp"
#include "rsmooth/rate_fit.hpp"
#include "rsmooth/version.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> problem;
  std::optional<rsmooth::Index> m;
  std::vector<rsmooth::Index> n;
  std::vector<rsmooth::Index> r;
  std::vector<double> lambda;
  std::vector<std::string> algo;
  std::optional<double> tol;
  std::optional<rsmooth::Index> max_iters;
  std::vector<std::uint64_t> seed;
  std::optional<rsmooth::Index> batches;
  std::optional<std::string> step_mode;
  std::optional<double> step_scale;
  std::optional<double> reference_objective;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<bool> timing;
};

void add_sweep_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config; flags override its fields");
  cmd->add_option("--problem", o.problem, "spca or cm");
  cmd->add_option("--m", o.m, "SPCA sample count");
  cmd->add_option("--n", o.n, "dimension sweep")->delimiter(',');
  cmd->add_option("--r", o.r, "rank sweep")->delimiter(',');
  cmd->add_option("--lambda", o.lambda, "sparsity weight sweep")->delimiter(',');
  cmd->add_option("--algo", o.algo, "rsg, rsg-epochs, rssg, rssg-epochs, rsub")->delimiter(',');
  cmd->add_option("--tol", o.tol, "stationarity tolerance (default 1e-8 n r)");
  cmd->add_option("--max-iters", o.max_iters, "iteration cap of the smoothing methods");
  cmd->add_option("--seed", o.seed, "seed list")->delimiter(',');
  cmd->add_option("--batches", o.batches, "number of SPCA row batches");
  cmd->add_option("--step-mode", o.step_mode, "theory or practical");
  cmd->add_option("--step-scale", o.step_scale, "practical step scale c");
  cmd->add_option("--reference-objective", o.reference_objective, "reference objective F_M");
  cmd->add_option("--jobs", o.jobs, "worker threads");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--timing", o.timing, "write wall time into per-run CSVs (default true)");
}

rsmooth::ExperimentConfig resolve(const Overrides& o, rsmooth::ExperimentConfig cfg) {
  using rsmooth::ConfigurationError;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigurationError("cannot open config " + o.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigurationError("config " + o.config + ": " + e.what());
    }
    cfg = rsmooth::experiment_config_from_json(j, cfg);
  }
  if (o.problem) cfg.problem = *o.problem;
  if (o.m) cfg.m = *o.m;
  if (!o.n.empty()) cfg.n = o.n;
  if (!o.r.empty()) cfg.r = o.r;
  if (!o.lambda.empty()) cfg.lambda = o.lambda;
  if (!o.algo.empty()) {
    cfg.algorithms.clear();
    for (const auto& a : o.algo) cfg.algorithms.push_back(rsmooth::parse_algorithm(a));
  }
  if (o.tol) cfg.tol = *o.tol;
  if (o.max_iters) cfg.max_iters = *o.max_iters;
  if (!o.seed.empty()) cfg.seeds = o.seed;
  if (o.batches) cfg.batches = *o.batches;
  if (o.step_mode) cfg.step_mode = rsmooth::parse_step_mode(*o.step_mode);
  if (o.step_scale) cfg.step_scale = *o.step_scale;
  if (o.reference_objective) cfg.reference_objective = *o.reference_objective;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.out) cfg.out = *o.out;
  if (o.timing) cfg.timing = *o.timing;
  cfg.validate();
  return cfg;
}

void print_result(const rsmooth::ExperimentResult& res) {
  for (const auto& row : res.table) {
    std::printf("n=%lld r=%lld lambda=%g seed=%llu\n", static_cast<long long>(row.n),
                static_cast<long long>(row.r), row.lambda,
                static_cast<unsigned long long>(row.seed));
    for (std::size_t a = 0; a < row.runs.size(); ++a) {
      const auto& s = *row.runs[a];
      std::printf("  %-12s phi=%.10e  %10.3f ms  %6lld it  %s%s\n",
                  std::string(rsmooth::to_string(s.algorithm)).c_str(), s.objective,
                  s.milliseconds, static_cast<long long>(s.iterations),
                  std::string(rsmooth::to_string(s.stop_reason)).c_str(),
                  a == row.best ? "  *" : "");
    }
  }
  std::printf("wrote %s\n", res.config.out.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian smoothing gradient methods: experiment harness"};
  app.set_version_flag("--version", std::string(rsmooth::library_version()));
  app.require_subcommand(1);

  Overrides run_opts;
  CLI::App* run = app.add_subcommand("run", "run a solver sweep and write traces and tables");
  add_sweep_flags(run, run_opts);

  std::string trace_path;
  CLI::App* fit = app.add_subcommand("fit-rate", "log-log slope of the running-min gradient norm");
  fit->add_option("trace", trace_path, "per-run trace CSV")->required();

  std::string from;
  Overrides replay_opts;
  CLI::App* replay = app.add_subcommand("replay", "re-run a saved experiment from its instances");
  replay->add_option("--from", from, "directory written by `run`")->required();
  add_sweep_flags(replay, replay_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      print_result(rsmooth::run_experiment(resolve(run_opts, {})));
    } else if (*fit) {
      std::ifstream in(trace_path);
      if (!in) throw rsmooth::Error("cannot open " + trace_path);
      const rsmooth::RateFit f = rsmooth::fit_rate(rsmooth::read_trace_csv(in));
      std::printf("slope %.6f\nintercept %.6f\nr_squared %.6f\npoints %lld\n", f.slope,
                  f.intercept, f.r_squared, static_cast<long long>(f.points));
    } else if (*replay) {
      if (!replay_opts.out) throw rsmooth::ConfigurationError("replay needs --out");
      rsmooth::ExperimentConfig base = rsmooth::load_manifest_config(from);
      rsmooth::ExperimentConfig cfg = resolve(replay_opts, base);
      print_result(rsmooth::replay_experiment(from, cfg.out, cfg));
    }
  } catch (const rsmooth::Error& e) {
    std::fprintf(stderr, "rsmooth: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
