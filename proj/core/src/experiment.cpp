#include "rsmooth/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rsmooth/instance_io.hpp"
#include "rsmooth/version.hpp"

namespace rsmooth {

std::string_view library_version() { return RSMOOTH_VERSION; }

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kStartPointMix = 0xD1B54A32D192ED03ULL;

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt_objective(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ConfigurationError("config field '" + field + "': " + why);
}

template <class T>
T field_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_field(key, "unexpected type " + std::string(j.type_name()));
  }
}

/// Accepts a scalar or an array of scalars.
template <class T>
std::vector<T> list_as(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) return {field_as<T>(j, key)};
  std::vector<T> out;
  for (const auto& e : j) out.push_back(field_as<T>(e, key));
  return out;
}

std::string cell_name(const std::string& problem, Index n, Index r, double lambda,
                      std::uint64_t seed) {
  return problem + "_n" + std::to_string(n) + "_r" + std::to_string(r) + "_lam" + fmt_g(lambda) +
         "_s" + std::to_string(seed);
}

struct Cell {
  Index n;
  Index r;
  double lambda;
  std::uint64_t seed;
  std::string name;
};

std::vector<Cell> cells_of(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (Index n : cfg.n)
    for (Index r : cfg.r)
      for (double lambda : cfg.lambda)
        for (std::uint64_t seed : cfg.seeds)
          cells.push_back({n, r, lambda, seed, cell_name(cfg.problem, n, r, lambda, seed)});
  return cells;
}

struct PreparedCell {
  Cell cell;
  std::shared_ptr<const SmoothedProblem> problem;
  StiefelPoint x1;
  std::string hash;
};

SmoothedProblem build_problem(const ExperimentConfig& cfg, const Cell& c, const Matrix& data) {
  if (cfg.problem == "spca") {
    SpcaInstance inst{data, c.lambda, c.r, c.seed};
    return make_spca_problem(inst, cfg.batches);
  }
  CmInstance inst{data, c.lambda, c.r, cfg.cm_length};
  return make_cm_problem(inst);
}

StiefelPoint start_point(const Cell& c) {
  std::mt19937_64 rng(c.seed ^ kStartPointMix);
  return StiefelPoint::random(c.n, c.r, rng);
}

InstanceMeta meta_of(const ExperimentConfig& cfg, const Cell& c) {
  InstanceMeta meta;
  meta.problem = cfg.problem;
  meta.m = cfg.problem == "spca" ? cfg.m : 0;
  meta.n = c.n;
  meta.r = c.r;
  meta.lambda = c.lambda;
  meta.seed = c.seed;
  meta.length = cfg.problem == "cm" ? cfg.cm_length : 0.0;
  return meta;
}

int max_epoch_for(Index max_iters) {
  int l = 0;
  while (((Index{2} << l) - 1) < max_iters && l < 40) ++l;
  return l;
}

RunRecord run_one(const ExperimentConfig& cfg, const PreparedCell& pc, Algorithm algo) {
  const SmoothedProblem& p = *pc.problem;
  StopRule stop = StopRule::defaults(p, algo);
  if (cfg.tol) stop.tol = *cfg.tol;
  stop.max_iters = algo == Algorithm::Rsub ? cfg.rsub_max_iters : cfg.max_iters;
  stop.reference_objective = cfg.reference_objective;

  ScheduleConfig sc;
  sc.step_mode = cfg.step_mode;
  sc.step_scale = cfg.step_scale;
  sc.mu0 = cfg.mu0;
  sc.check_descent = false;

  switch (algo) {
    case Algorithm::Rsg:
      return solve_rsg(p, pc.x1, sc, stop);
    case Algorithm::RsgEpochs: {
      EpochOptions eo;
      eo.epsilon = stop.tol;
      return solve_rsg_epochs(p, pc.x1, sc, eo, stop);
    }
    case Algorithm::Rssg:
      return solve_rssg(p, pc.x1, sc, stop, pc.cell.seed);
    case Algorithm::RssgEpochs:
      return solve_rssg_epochs(p, pc.x1, sc, max_epoch_for(stop.max_iters), stop, pc.cell.seed);
    case Algorithm::Rsub:
      return solve_rsub(p, pc.x1, SubgradientOptions{}, stop);
  }
  throw ConfigurationError("unhandled algorithm");
}

/// Runs task(i) for i in [0, count) on `jobs` threads. The first exception is
/// rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("short write to " + path.string());
}

void build_table(ExperimentResult& res) {
  const std::size_t na = res.config.algorithms.size();
  std::vector<std::size_t> wins(na, 0);
  for (std::size_t i = 0; i < res.runs.size(); i += na) {
    TableRow row;
    const RunSummary& first = res.runs[i];
    row.n = first.n;
    row.r = first.r;
    row.lambda = first.lambda;
    row.seed = first.seed;
    for (std::size_t a = 0; a < na; ++a) {
      row.runs.push_back(&res.runs[i + a]);
      if (res.runs[i + a].milliseconds < row.runs[row.best]->milliseconds) row.best = a;
    }
    ++wins[row.best];
    res.table.push_back(std::move(row));
  }
  res.win_percentages.assign(na, 0.0);
  if (!res.table.empty()) {
    for (std::size_t a = 0; a < na; ++a) {
      res.win_percentages[a] = 100.0 * static_cast<double>(wins[a]) /
                               static_cast<double>(res.table.size());
    }
  }
}

std::string table_markdown(const ExperimentResult& res) {
  std::ostringstream md;
  md << "# " << res.config.problem << " comparison\n\n";
  md << "Objective is phi at the final iterate; time is solver wall time in ms (instance "
        "generation and I/O excluded). `*` marks the fastest algorithm per row; ties go to "
        "the algorithm listed first.\n\n";
  md << "| n | r | lambda | seed |";
  for (Algorithm a : res.config.algorithms) md << ' ' << to_string(a) << " obj | " << to_string(a) << " ms |";
  md << "\n|---|---|---|---|";
  for (std::size_t a = 0; a < res.config.algorithms.size(); ++a) md << "---|---|";
  md << '\n';
  for (const TableRow& row : res.table) {
    md << "| " << row.n << " | " << row.r << " | " << fmt_g(row.lambda) << " | " << row.seed
       << " |";
    for (std::size_t a = 0; a < row.runs.size(); ++a) {
      md << ' ' << fmt_objective(row.runs[a]->objective) << " | "
         << fmt_fixed(row.runs[a]->milliseconds, 3) << (a == row.best ? "*" : "") << " |";
    }
    md << '\n';
  }
  md << "| wins (%) | | | |";
  for (double pct : res.win_percentages) md << " | " << fmt_fixed(pct, 1) << " |";
  md << '\n';
  return md.str();
}

std::string table_csv(const ExperimentResult& res) {
  std::ostringstream csv;
  csv << "n,r,lambda,seed,algorithm,objective,time_ms,iterations,stop_reason,best\n";
  for (const TableRow& row : res.table) {
    for (std::size_t a = 0; a < row.runs.size(); ++a) {
      const RunSummary& s = *row.runs[a];
      csv << row.n << ',' << row.r << ',' << fmt_g(row.lambda) << ',' << row.seed << ','
          << to_string(s.algorithm) << ',' << fmt_objective(s.objective) << ','
          << fmt_fixed(s.milliseconds, 3) << ',' << s.iterations << ','
          << to_string(s.stop_reason) << ',' << (a == row.best ? 1 : 0) << '\n';
    }
  }
  csv << "wins_percent";
  for (std::size_t a = 0; a < res.win_percentages.size(); ++a) {
    csv << ',' << to_string(res.config.algorithms[a]) << '=' << fmt_fixed(res.win_percentages[a], 1);
  }
  csv << '\n';
  return csv.str();
}

nlohmann::json manifest_json(const ExperimentResult& res,
                             const std::vector<PreparedCell>& cells) {
  nlohmann::json m;
  m["library"] = "rsmooth";
  m["library_version"] = std::string(library_version());
  m["config"] = to_json(res.config);
  m["seeds"] = res.config.seeds;
  m["timing_note"] = "time_ms is solver wall time on a monotonic clock; setup and I/O excluded";
  nlohmann::json inst = nlohmann::json::object();
  for (const PreparedCell& pc : cells) inst[pc.cell.name] = pc.hash;
  m["instances"] = inst;
  nlohmann::json runs = nlohmann::json::array();
  for (const RunSummary& s : res.runs) {
    runs.push_back({{"n", s.n},
                    {"r", s.r},
                    {"lambda", s.lambda},
                    {"seed", s.seed},
                    {"algorithm", std::string(to_string(s.algorithm))},
                    {"objective", s.objective},
                    {"time_ms", s.milliseconds},
                    {"iterations", s.iterations},
                    {"csv", s.csv},
                    {"instance_hash", s.instance_hash},
                    {"summary", s.summary}});
  }
  m["runs"] = runs;
  return m;
}

ExperimentResult execute(const ExperimentConfig& cfg, std::vector<PreparedCell> cells,
                         const fs::path& out) {
  ensure_dir(out / "runs");
  ExperimentResult res;
  res.config = cfg;
  res.config.out = out;
  const std::size_t na = cfg.algorithms.size();
  res.runs.resize(cells.size() * na);

  parallel_for(res.runs.size(), cfg.jobs, [&](std::size_t i) {
    const PreparedCell& pc = cells[i / na];
    const Algorithm algo = cfg.algorithms[i % na];
    RunRecord rec = run_one(cfg, pc, algo);
    RunSummary& s = res.runs[i];
    s.n = pc.cell.n;
    s.r = pc.cell.r;
    s.lambda = pc.cell.lambda;
    s.seed = pc.cell.seed;
    s.algorithm = algo;
    s.objective = rec.final_row().objective;
    s.milliseconds = std::round(rec.total_seconds * 1e6) / 1e3;
    s.iterations = rec.final_row().k - 1;
    s.stop_reason = rec.stop_reason;
    s.csv = "runs/" + pc.cell.name + "_" + std::string(to_string(algo)) + ".csv";
    s.instance_hash = pc.hash;
    s.summary = summary_json(rec);
    std::ofstream csv(out / s.csv, std::ios::binary);
    if (!csv) throw Error("cannot write " + (out / s.csv).string());
    write_trace_csv(rec, csv, cfg.timing);
    if (!csv) throw Error("short write to " + (out / s.csv).string());
  });

  build_table(res);
  write_text(out / "table.md", table_markdown(res));
  write_text(out / "table.csv", table_csv(res));
  write_text(out / "manifest.json", manifest_json(res, cells).dump(2) + "\n");
  return res;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (problem != "spca" && problem != "cm") bad_field("problem", "expected \"spca\" or \"cm\"");
  if (problem == "spca" && m < 1) bad_field("m", "must be positive");
  if (n.empty()) bad_field("n", "must not be empty");
  if (r.empty()) bad_field("r", "must not be empty");
  if (lambda.empty()) bad_field("lambda", "must not be empty");
  if (algorithms.empty()) bad_field("algorithms", "must not be empty");
  if (seeds.empty()) bad_field("seeds", "must not be empty");
  for (Index v : n) {
    if (v < 1) bad_field("n", "dimensions must be positive");
    if (problem == "cm" && v < 3) bad_field("n", "cm needs n >= 3");
  }
  for (Index v : r) {
    if (v < 1) bad_field("r", "dimensions must be positive");
    for (Index nv : n)
      if (v > nv) bad_field("r", "r = " + std::to_string(v) + " exceeds n = " + std::to_string(nv));
  }
  for (double v : lambda)
    if (!(v >= 0) || !std::isfinite(v)) bad_field("lambda", "must be finite and nonnegative");
  std::set<Algorithm> seen;
  for (Algorithm a : algorithms)
    if (!seen.insert(a).second) bad_field("algorithms", "duplicate " + std::string(to_string(a)));
  if (tol && !(*tol > 0)) bad_field("tol", "must be positive");
  if (max_iters < 0) bad_field("max_iters", "must be nonnegative");
  if (rsub_max_iters < 0) bad_field("rsub_max_iters", "must be nonnegative");
  if (batches < 1) bad_field("batches", "must be positive");
  if (problem == "spca" && batches > m) bad_field("batches", "exceeds the sample count m");
  if (step_scale && !(*step_scale > 0)) bad_field("step_scale", "must be positive");
  if (mu0 && !(*mu0 > 0)) bad_field("mu0", "must be positive");
  if (!(cm_length > 0)) bad_field("cm_length", "must be positive");
  if (jobs < 1) bad_field("jobs", "must be at least 1");
  if (out.empty()) bad_field("out", "must not be empty");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "problem") {
      cfg.problem = field_as<std::string>(v, key);
    } else if (key == "m") {
      cfg.m = field_as<Index>(v, key);
    } else if (key == "n") {
      cfg.n = list_as<Index>(v, key);
    } else if (key == "r") {
      cfg.r = list_as<Index>(v, key);
    } else if (key == "lambda") {
      cfg.lambda = list_as<double>(v, key);
    } else if (key == "algorithms" || key == "algo") {
      cfg.algorithms.clear();
      for (const std::string& name : list_as<std::string>(v, key)) {
        try {
          cfg.algorithms.push_back(parse_algorithm(name));
        } catch (const ConfigurationError& e) {
          bad_field(key, e.what());
        }
      }
    } else if (key == "tol") {
      cfg.tol = v.is_null() ? std::nullopt : std::optional<double>(field_as<double>(v, key));
    } else if (key == "max_iters") {
      cfg.max_iters = field_as<Index>(v, key);
    } else if (key == "rsub_max_iters") {
      cfg.rsub_max_iters = field_as<Index>(v, key);
    } else if (key == "seeds" || key == "seed") {
      cfg.seeds = list_as<std::uint64_t>(v, key);
    } else if (key == "batches") {
      cfg.batches = field_as<Index>(v, key);
    } else if (key == "step_mode") {
      try {
        cfg.step_mode = parse_step_mode(field_as<std::string>(v, key));
      } catch (const ConfigurationError& e) {
        bad_field(key, e.what());
      }
    } else if (key == "step_scale") {
      cfg.step_scale = v.is_null() ? std::nullopt : std::optional<double>(field_as<double>(v, key));
    } else if (key == "mu0") {
      cfg.mu0 = v.is_null() ? std::nullopt : std::optional<double>(field_as<double>(v, key));
    } else if (key == "reference_objective") {
      cfg.reference_objective =
          v.is_null() ? std::nullopt : std::optional<double>(field_as<double>(v, key));
    } else if (key == "cm_length") {
      cfg.cm_length = field_as<double>(v, key);
    } else if (key == "jobs") {
      cfg.jobs = field_as<int>(v, key);
    } else if (key == "out") {
      cfg.out = field_as<std::string>(v, key);
    } else if (key == "timing") {
      cfg.timing = field_as<bool>(v, key);
    } else {
      bad_field(key, "unknown key");
    }
  }
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["problem"] = cfg.problem;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["r"] = cfg.r;
  j["lambda"] = cfg.lambda;
  std::vector<std::string> algos;
  for (Algorithm a : cfg.algorithms) algos.emplace_back(to_string(a));
  j["algorithms"] = algos;
  j["tol"] = cfg.tol ? nlohmann::json(*cfg.tol) : nlohmann::json(nullptr);
  j["max_iters"] = cfg.max_iters;
  j["rsub_max_iters"] = cfg.rsub_max_iters;
  j["seeds"] = cfg.seeds;
  j["batches"] = cfg.batches;
  j["step_mode"] = std::string(to_string(cfg.step_mode));
  j["step_scale"] = cfg.step_scale ? nlohmann::json(*cfg.step_scale) : nlohmann::json(nullptr);
  j["mu0"] = cfg.mu0 ? nlohmann::json(*cfg.mu0) : nlohmann::json(nullptr);
  j["reference_objective"] =
      cfg.reference_objective ? nlohmann::json(*cfg.reference_objective) : nlohmann::json(nullptr);
  j["cm_length"] = cfg.cm_length;
  j["jobs"] = cfg.jobs;
  j["out"] = cfg.out.string();
  j["timing"] = cfg.timing;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out / "instances");
  std::vector<PreparedCell> prepared;
  for (const Cell& c : cells_of(cfg)) {
    Matrix data = cfg.problem == "spca" ? spca_generate(cfg.m, c.n, c.r, c.lambda, c.seed).b
                                        : cm_build_h(c.n, cfg.cm_length);
    const InstanceMeta meta = save_instance(cfg.out / "instances" / c.name, data, meta_of(cfg, c));
    auto problem = std::make_shared<const SmoothedProblem>(build_problem(cfg, c, data));
    prepared.push_back({c, std::move(problem), start_point(c), meta.hash});
  }
  return execute(cfg, std::move(prepared), cfg.out);
}

ExperimentConfig load_manifest_config(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigurationError("no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("unreadable manifest in " + dir.string() + ": " + e.what());
  }
  if (!m.contains("config")) throw ConfigurationError("manifest has no config section");
  ExperimentConfig cfg = experiment_config_from_json(m.at("config"));
  cfg.validate();
  return cfg;
}

ExperimentResult replay_experiment(const fs::path& from, const fs::path& out,
                                   std::optional<ExperimentConfig> override_cfg) {
  ExperimentConfig cfg = override_cfg ? *override_cfg : load_manifest_config(from);
  cfg.out = out;
  cfg.validate();
  if (fs::exists(out) && fs::equivalent(from, out)) {
    throw ConfigurationError("replay output directory must differ from the source");
  }
  ensure_dir(out / "instances");
  std::vector<PreparedCell> prepared;
  for (const Cell& c : cells_of(cfg)) {
    LoadedInstance li = load_instance(from / "instances" / c.name, c.seed);
    const InstanceMeta expect = meta_of(cfg, c);
    if (li.meta.problem != expect.problem || li.meta.m != expect.m || li.meta.n != expect.n ||
        li.meta.r != expect.r || li.meta.lambda != expect.lambda) {
      throw IntegrityError("stored instance " + c.name + " does not match the replay config");
    }
    save_instance(out / "instances" / c.name, li.data, li.meta);
    auto problem = std::make_shared<const SmoothedProblem>(build_problem(cfg, c, li.data));
    prepared.push_back({c, std::move(problem), start_point(c), li.meta.hash});
  }
  return execute(cfg, std::move(prepared), out);
}

}  // namespace rsmooth
