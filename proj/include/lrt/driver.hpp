#pragma once

#include "lrt/config.hpp"
#include "lrt/output.hpp"
#include "lrt/tensor_tree.hpp"
#include "lrt/transport_solver.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lrt {

struct RunResult {
  RunConfig config;
  double dt = 0.0;
  std::vector<DiagnosticsRow> diag;  // step 0 (initial data) to the last step
  Eigen::MatrixXd rho;               // final density, nx x ny
  std::optional<HTensor> g;          // low-rank solvers only
  std::vector<NodeSpectrum> spectra; // of the final g
  SliceLines slices;
  double l1_error = std::numeric_limits<double>::quiet_NaN();  // manufactured only
};

using StepObserver = std::function<void(const DiagnosticsRow&)>;

// Runs the configured solver in memory. DiagnosticsRow::wall_time holds the
// seconds since the start; it is the only nondeterministic field.
RunResult simulate(const RunConfig& cfg, const StepObserver& observer = {});

// y of the second slice line when none is configured
double default_slice_y(const ProblemConfig& p);

// Writes density.bin, slices.csv, diag.csv, spectra.csv, timing.csv and
// manifest.cfg into dir (created if needed). Everything except timing.csv is
// reproducible byte for byte.
void write_artifacts(const RunResult& r, const std::string& dir);

// simulate + write_artifacts into cfg.output
RunResult run(const RunConfig& cfg, const StepObserver& observer = {});

struct ConvergenceRow {
  int n = 0;
  int steps = 0;
  double error = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();  // log2(e_prev / e), first row NaN
  std::vector<Index> ranks;
};

// Manufactured problem on each mesh (n x n) with the other knobs of base.
std::vector<ConvergenceRow> convergence(const RunConfig& base, const std::vector<int>& meshes,
                                        const std::function<void(const ConvergenceRow&)>& on_row = {});
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};
// "key=v1,v2,v3"
SweepAxis parse_sweep_axis(const std::string& spec);

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> assignment;
  std::string dir;
  RunResult result;
};

// Cartesian product of the axes (first axis slowest). Point k runs in
// <output>/point_kkk; <output>/aggregate.csv stacks all diag rows with the
// point's assignment in front. Runs go to `threads` workers; the aggregate is
// written in point order after all runs finished.
std::vector<SweepPoint> sweep(const RunConfig& tmpl, const std::vector<SweepAxis>& grid, int threads = 1);

// LRT_THREADS, default 1. Throws on a malformed value.
int thread_count_from_env();

}  // namespace lrt
