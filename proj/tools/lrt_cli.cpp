// lrt: command line front end.
//   lrt run --config FILE [--set key=value ...]
//   lrt convergence --eps 1 --meshes 16,32,64 [--set solver=lowrank-split]
//   lrt sweep --config FILE --axis n=32,64,128 [--axis ...]
//   lrt dump-quadrature --order 8
//   lrt selftest
// Failures exit nonzero and print one JSON object on stderr.

#include "lrt/config.hpp"
#include "lrt/driver.hpp"
#include "lrt/fullgrid.hpp"
#include "lrt/quadrature.hpp"
#include "lrt/tensor_tree.hpp"
#include "lrt/transport_solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

using namespace lrt;

namespace {

std::string join_ranks(const std::vector<Index>& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + std::to_string(r[i]);
  return "[" + s + "]";
}

RunConfig base_config(const std::string& path, const std::vector<std::string>& sets) {
  RunConfig cfg;
  if (!path.empty()) cfg = load_config(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_key(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

int cmd_run(const RunConfig& cfg, bool verbose) {
  const RunResult r = run(cfg, [&](const DiagnosticsRow& row) {
    if (verbose)
      std::printf("step %d t=%.6g ranks=%s compression=%.4g\n", row.step, row.t, join_ranks(row.ranks).c_str(),
                  row.compression);
  });
  const auto& last = r.diag.back();
  std::printf("run ok solver=%s steps=%d t=%.17g ranks=%s compression=%.6g", to_string(cfg.solver).c_str(), last.step,
              last.t, join_ranks(last.ranks).c_str(), last.compression);
  if (!std::isnan(r.l1_error)) std::printf(" l1_error=%.6e", r.l1_error);
  std::printf(" dir=%s\n", cfg.output.c_str());
  return 0;
}

int cmd_convergence(const RunConfig& cfg, const std::vector<int>& meshes, const std::string& csv) {
  std::printf("%6s %8s %14s %8s  %s\n", "N", "steps", "L1 error", "order", "Rank(g)");
  const auto rows = convergence(cfg, meshes, [](const ConvergenceRow& r) {
    char order[16] = "-";
    if (!std::isnan(r.order)) std::snprintf(order, sizeof order, "%.2f", r.order);
    std::printf("%6d %8d %14.6e %8s  %s\n", r.n, r.steps, r.error, order, join_ranks(r.ranks).c_str());
    std::fflush(stdout);
  });
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot write " + csv);
    write_convergence_csv(out, rows);
  }
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& axes) {
  std::vector<SweepAxis> grid;
  for (const auto& a : axes) grid.push_back(parse_sweep_axis(a));
  const auto points = sweep(cfg, grid, thread_count_from_env());
  for (const auto& p : points) {
    std::printf("%s", p.dir.c_str());
    for (const auto& [k, v] : p.assignment) std::printf(" %s=%s", k.c_str(), v.c_str());
    std::printf(" final_ranks=%s ndofs=%ld\n", join_ranks(p.result.diag.back().ranks).c_str(),
                static_cast<long>(p.result.diag.back().ndofs_g + p.result.diag.back().ndofs_rho));
  }
  std::printf("sweep ok points=%zu aggregate=%s/aggregate.csv\n", points.size(), cfg.output.c_str());
  return 0;
}

int cmd_dump_quadrature(int order, const std::string& path) {
  const AngularQuadrature q(order);
  if (path.empty()) {
    write_quadrature_csv(q, std::cout);
  } else {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_quadrature_csv(q, out);
  }
  return 0;
}

// Quick health check, a few seconds at most.
int cmd_selftest() {
  int failed = 0;
  auto report = [&](const char* name, bool ok, double value) {
    std::printf("%-36s %s (%.3e)\n", name, ok ? "PASS" : "FAIL", value);
    failed += ok ? 0 : 1;
  };

  {
    const AngularQuadrature q(4);
    double worst = 0.0;
    for (int a = 0; a <= 7; ++a)
      for (int b = 0; a + b <= 7; ++b)
        for (int c = 0; a + b + c <= 7; ++c) {
          const Eigen::MatrixXd v =
              q.xi().array().pow(a) * q.eta().array().pow(b) *
              (Eigen::VectorXd::Ones(q.n_theta()) * q.mu().transpose()).array().pow(c);
          worst = std::max(worst, std::abs(q.average(v) - sphere_monomial_average(a, b, c)));
        }
    report("quadrature S4 up to degree 7", worst < 1e-12, worst);
  }
  {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    DenseTensor a({8, 8, 6, 6});
    for (auto& v : a.values()) v = nd(rng);
    const auto tree = DimensionTree::unsplit(8, 8, 6, 6);
    const HTensor full = from_full(a, tree, 0.0);
    TruncationReport rep;
    const HTensor t = truncate(full, 1e-1, kDefaultMaxRank, &rep);
    const double err = (to_full(t).vec() - a.vec()).norm();
    report("truncation error <= discarded spectra", err <= rep.discarded * (1 + 1e-10), err);
  }
  {
    ProblemConfig p = manufactured(1.0, 16, 4);
    p.steps = 3;
    p.rel_tol_g = 1e-14;
    const Discretization d = discretize(p);
    TransportSolver lr(d);
    FullGridSolver fg(d);
    auto s = lr.initial_state();
    auto f = fg.initial_state();
    for (int k = 0; k < p.steps; ++k) {
      lr.step(s);
      fg.step(f);
    }
    const double diff = (s.rho - f.rho).cwiseAbs().maxCoeff();
    report("low-rank vs full grid, 3 steps", diff <= 1e-9, diff);
  }
  std::printf("selftest %s\n", failed ? "FAILED" : "ok");
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-rank macro-micro kinetic transport solver"};
  app.require_subcommand(1);

  std::string config_path, csv_path, quad_path;
  std::vector<std::string> sets, axes;
  bool verbose = false;
  double eps = 1.0;
  std::vector<int> meshes{16, 32, 64};
  int order = 8;

  auto* run = app.add_subcommand("run", "Run one simulation and write its artifacts");
  run->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  run->add_option("-s,--set", sets, "override, key=value");
  run->add_flag("-v,--verbose", verbose, "print every step");

  auto* conv = app.add_subcommand("convergence", "L1 errors and orders on the manufactured problem");
  conv->add_option("-c,--config", config_path, "config file")->check(CLI::ExistingFile);
  conv->add_option("-s,--set", sets, "override, key=value");
  conv->add_option("--eps", eps, "Knudsen number");
  conv->add_option("--meshes", meshes, "mesh sizes")->delimiter(',');
  conv->add_option("--csv", csv_path, "also write the table here");

  auto* sw = app.add_subcommand("sweep", "Runs over a parameter grid");
  sw->add_option("-c,--config", config_path, "template config")->check(CLI::ExistingFile);
  sw->add_option("-s,--set", sets, "override, key=value");
  sw->add_option("-a,--axis", axes, "key=v1,v2,...")->required();

  auto* dq = app.add_subcommand("dump-quadrature", "Write the angular quadrature as CSV");
  dq->add_option("-n,--order", order, "S_N order")->check(CLI::PositiveNumber);
  dq->add_option("-o,--output", quad_path, "file (default stdout)");

  auto* st = app.add_subcommand("selftest", "Fast internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::json j{{"error", "usage"}, {"message", e.what()}};
    std::cerr << j.dump() << std::endl;
    return 2;
  }

  try {
    if (*run) return cmd_run(base_config(config_path, sets), verbose);
    if (*conv) {
      RunConfig cfg = base_config(config_path, sets);
      if (conv->count("--eps")) cfg.problem.eps = eps;
      return cmd_convergence(cfg, meshes, csv_path);
    }
    if (*sw) return cmd_sweep(base_config(config_path, sets), axes);
    if (*dq) return cmd_dump_quadrature(order, quad_path);
    if (*st) return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << nlohmann::json{{"error", "config"}, {"message", e.what()}}.dump() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "runtime"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
