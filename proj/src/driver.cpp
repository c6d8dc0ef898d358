#include "lrt/driver.hpp"

#include "lrt/discretization.hpp"
#include "lrt/fullgrid.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace lrt {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

DiagnosticsRow dense_diagnostics(const FullGridSolver& s, const DenseState& st) {
  const Discretization& d = s.disc();
  DiagnosticsRow r;
  r.step = st.step;
  r.t = st.t;
  r.ndofs_g = st.g.size();
  r.ndofs_rho = st.rho.size();
  r.compression = static_cast<double>(r.ndofs_g + r.ndofs_rho) / static_cast<double>(d.full_dofs());
  r.mass_rho = d.mass(st.rho);
  r.mass_eps_g = std::abs(d.cfg.eps * s.angular_average(st.g).sum() * d.cell_area());
  r.zero_density = s.zero_density_ratio(st.g);
  return r;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

double default_slice_y(const ProblemConfig& p) {
  // the lattice is usually inspected just above its centre row of cells
  if (p.kind == ProblemKind::lattice) return 4.046875;
  return 0.5 * (p.y0 + p.y1);
}

RunResult simulate(const RunConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunResult r;
  r.config = cfg;
  const Discretization d = discretize(cfg.problem);
  r.dt = d.dt;
  r.slices = slice_lines(cfg.problem, cfg.slice_y.value_or(default_slice_y(cfg.problem)));

  auto record = [&](DiagnosticsRow row) {
    row.wall_time = seconds_since(t0);
    r.diag.push_back(row);
    if (observer) observer(r.diag.back());
  };

  double t_end = 0.0;
  if (cfg.solver == SolverKind::fullgrid) {
    const FullGridSolver solver(d);
    DenseState st = solver.initial_state();
    record(dense_diagnostics(solver, st));
    for (int k = 0; k < d.n_steps; ++k) {
      solver.step(st);
      record(dense_diagnostics(solver, st));
    }
    r.rho = st.rho;
    t_end = st.t;
    r.spectra = node_spectra(from_full(to_dense_tensor(st, d), d.tree, 0.0, d.full_dofs()));
  } else {
    const TransportSolver solver(d);
    MacroMicroState st = solver.initial_state();
    record(solver.diagnostics(st));
    for (int k = 0; k < d.n_steps; ++k) {
      const StepReport rep = solver.step(st);
      DiagnosticsRow row = solver.diagnostics(st);
      row.cap_reached = rep.cap_reached;
      record(row);
    }
    r.rho = st.rho;
    t_end = st.t;
    r.spectra = node_spectra(st.g);
    r.g = std::move(st.g);
  }
  if (cfg.problem.kind == ProblemKind::manufactured) r.l1_error = analytic_error(r.rho, cfg.problem, d.data, t_end);
  return r;
}

void write_artifacts(const RunResult& r, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  write_density((root / "density.bin").string(), r.rho);
  {
    auto out = open_out(root / "slices.csv");
    write_slices(out, r.rho, r.config.problem, r.slices);
  }
  {
    auto out = open_out(root / "diag.csv");
    write_diag_header(out);
    for (const auto& row : r.diag) write_diag_row(out, row);
  }
  {
    auto out = open_out(root / "spectra.csv");
    write_spectra(out, r.spectra);
  }
  {
    auto out = open_out(root / "timing.csv");
    out << "step,wall_seconds\n";
    for (const auto& row : r.diag) out << row.step << ',' << format_double(row.wall_time) << '\n';
  }
  auto out = open_out(root / "manifest.cfg");
  out << "# resolved configuration; rerun with: lrt run --config manifest.cfg\n";
  write_config(r.config, out);
  const DiagnosticsRow& last = r.diag.back();
  out << "\n[record]\n";
  out << "format_version = 1\n";
  out << "steps = " << last.step << "\n";
  out << "dt = " << format_double(r.dt) << "\n";
  out << "t_end = " << format_double(last.t) << "\n";
  out << "slice_x_actual = " << format_double(r.slices.x_mid) << "\n";
  out << "slice_y_actual = " << format_double(r.slices.y_line) << "\n";
  if (!std::isnan(r.l1_error)) out << "l1_error = " << format_double(r.l1_error) << "\n";
  out << "files = density.bin slices.csv diag.csv spectra.csv timing.csv\n";
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
}

RunResult run(const RunConfig& cfg, const StepObserver& observer) {
  RunResult r = simulate(cfg, observer);
  write_artifacts(r, cfg.output);
  return r;
}

std::vector<ConvergenceRow> convergence(const RunConfig& base, const std::vector<int>& meshes,
                                        const std::function<void(const ConvergenceRow&)>& on_row) {
  if (base.problem.kind != ProblemKind::manufactured)
    throw std::invalid_argument("convergence needs the manufactured problem");
  if (meshes.size() < 2) throw std::invalid_argument("convergence needs at least two meshes");
  std::vector<ConvergenceRow> rows;
  for (int n : meshes) {
    RunConfig c = base;
    c.problem.nx = c.problem.ny = n;
    const RunResult r = simulate(c);
    ConvergenceRow row;
    row.n = n;
    row.steps = r.diag.back().step;
    row.error = r.l1_error;
    row.ranks = r.diag.back().ranks;
    if (!rows.empty()) row.order = std::log2(rows.back().error / row.error);
    rows.push_back(row);
    if (on_row) on_row(row);
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "n,steps,l1_error,order,ranks\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.steps << ',' << format_double(r.error) << ','
        << (std::isnan(r.order) ? std::string() : format_double(r.order)) << ',';
    for (std::size_t i = 0; i < r.ranks.size(); ++i) out << (i ? ";" : "") << r.ranks[i];
    out << '\n';
  }
}

SweepAxis parse_sweep_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("sweep axis must look like key=v1,v2");
  SweepAxis a;
  a.key = spec.substr(0, eq);
  std::string rest = spec.substr(eq + 1);
  std::size_t pos = 0;
  while (true) {
    const auto comma = rest.find(',', pos);
    a.values.push_back(rest.substr(pos, comma - pos));
    if (a.values.back().empty()) throw ConfigError("empty value in sweep axis " + a.key);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return a;
}

std::vector<SweepPoint> sweep(const RunConfig& tmpl, const std::vector<SweepAxis>& grid, int threads) {
  std::size_t count = 1;
  for (const auto& a : grid) {
    if (a.values.empty()) throw ConfigError("sweep axis " + a.key + " has no values");
    count *= a.values.size();
  }
  std::vector<SweepPoint> points(count);
  std::vector<RunConfig> configs(count, tmpl);
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t rem = p;
    for (std::size_t k = grid.size(); k-- > 0;) {
      const auto& a = grid[k];
      const std::string& v = a.values[rem % a.values.size()];
      rem /= a.values.size();
      points[p].assignment.insert(points[p].assignment.begin(), {a.key, v});
    }
    for (const auto& [key, value] : points[p].assignment) apply_key(configs[p], key, value);
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu", p);
    points[p].dir = (fs::path(tmpl.output) / name).string();
    configs[p].output = points[p].dir;
    configs[p].validate();  // fail before anything runs
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (std::size_t p; (p = next.fetch_add(1)) < count;) {
      try {
        points[p].result = run(configs[p]);
      } catch (...) {
        errors[p] = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  fs::create_directories(tmpl.output);
  auto out = open_out(fs::path(tmpl.output) / "aggregate.csv");
  out << "point";
  for (const auto& a : grid) out << ',' << a.key;
  out << ',';
  write_diag_header(out);
  for (std::size_t p = 0; p < count; ++p)
    for (const auto& row : points[p].result.diag) {
      out << p;
      for (const auto& kv : points[p].assignment) out << ',' << kv.second;
      out << ',';
      write_diag_row(out, row);
    }
  if (!out) throw std::runtime_error("cannot write aggregate.csv");
  return points;
}

int thread_count_from_env() {
  const char* v = std::getenv("LRT_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) throw ConfigError(std::string("LRT_THREADS must be a positive integer, got '") + v + "'");
  return static_cast<int>(n);
}

}  // namespace lrt
