#include "rsmooth/run_record.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace rsmooth {

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Tolerance: return "Tolerance";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::BeatReference: return "BeatReference";
  }
  return "Unknown";
}

void write_trace_csv(const RunRecord& record, std::ostream& out, bool include_timing) {
  out << kTraceHeader << '\n';
  for (const TraceRow& row : record.rows) {
    out << row.k << ',';
    for (double v : {row.mu, row.gamma, row.ell, row.grad_norm, row.prox_residual, row.smoothed,
                     row.objective}) {
      put(out, v);
      out << ',';
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", include_timing ? row.seconds : 0.0);
    out << buf << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw Error("trace CSV header mismatch: '" + line + "'");
  std::vector<TraceRow> rows;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(fields, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        // stod rejects "nan"/"inf" spellings on some platforms
        if (cell == "nan" || cell == "-nan") v.push_back(std::nan(""));
        else if (cell == "inf") v.push_back(INFINITY);
        else if (cell == "-inf") v.push_back(-INFINITY);
        else throw Error("trace CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != 9) {
      throw Error("trace CSV line " + std::to_string(lineno) + ": expected 9 fields");
    }
    TraceRow row;
    row.k = static_cast<Index>(v[0]);
    row.mu = v[1];
    row.gamma = v[2];
    row.ell = v[3];
    row.grad_norm = v[4];
    row.prox_residual = v[5];
    row.smoothed = v[6];
    row.objective = v[7];
    row.seconds = v[8];
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json summary_json(const RunRecord& record) {
  nlohmann::json j;
  j["algorithm"] = record.algorithm;
  j["stop_reason"] = std::string(to_string(record.stop_reason));
  j["iterations"] = record.rows.empty() ? 0 : record.rows.back().k;
  j["seed"] = record.seed;
  j["total_seconds"] = std::round(record.total_seconds * 1000.0) / 1000.0;
  if (!record.rows.empty()) {
    const TraceRow& last = record.rows.back();
    j["final"] = {{"grad_norm", last.grad_norm},
                  {"prox_residual", last.prox_residual},
                  {"F_k", last.smoothed},
                  {"phi", last.objective},
                  {"mu", last.mu}};
  }
  if (record.sampled_index) j["sampled_index"] = *record.sampled_index;
  j["config"] = {{"step_mode", record.step_mode},
                 {"mu0", record.mu0},
                 {"step_scale", record.step_scale},
                 {"gradient_bound", record.gradient_bound},
                 {"alpha", record.alpha},
                 {"beta", record.beta},
                 {"tol", record.tol},
                 {"max_iters", record.max_iters}};
  j["config"]["reference_objective"] =
      record.reference_objective ? nlohmann::json(*record.reference_objective) : nlohmann::json();
  j["descent"] = {{"checks", record.descent_checks},
                  {"violations", record.descent_violations},
                  {"max_excess", record.max_descent_excess}};
  if (!record.epochs.empty()) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochRecord& e : record.epochs) {
      nlohmann::json je{{"l", e.l}, {"first_k", e.first_k}, {"last_k", e.last_k}};
      if (e.sampled_index) {
        je["sampled_index"] = *e.sampled_index;
        je["grad_norm"] = e.sampled_grad_norm;
        je["prox_residual"] = e.sampled_prox_residual;
        if (e.sampled_corrected_residual) je["corrected_residual"] = *e.sampled_corrected_residual;
      } else {
        je["best_grad_norm"] = e.best_grad_norm;
        je["best_k"] = e.best_k;
      }
      epochs.push_back(std::move(je));
    }
    j["epochs"] = std::move(epochs);
  }
  return j;
}

}  // namespace rsmooth
