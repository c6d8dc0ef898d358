#include "lrt/config.hpp"
#include "lrt/driver.hpp"
#include "lrt/output.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace lrt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig small_run(const fs::path& out) {
  RunConfig c;
  c.problem = manufactured(1.0, 16, 4);
  c.problem.steps = 3;
  c.output = out.string();
  return c;
}

const char* kDeterministicFiles[] = {"density.bin", "slices.csv", "diag.csv", "spectra.csv", "manifest.cfg"};

}  // namespace

TEST(Config, SectionSelectsProblemAndKeysApply) {
  const RunConfig c = parse("solver = lowrank-split\n[variable_scattering]\nn = 24\neps = 0.5  # comment\n");
  EXPECT_EQ(c.problem.kind, ProblemKind::variable_scattering);
  EXPECT_EQ(c.solver, SolverKind::lowrank_split);
  EXPECT_EQ(c.problem.tree, TreeKind::split);
  EXPECT_EQ(c.problem.nx, 24);
  EXPECT_EQ(c.problem.ny, 24);
  EXPECT_EQ(c.problem.eps, 0.5);
  EXPECT_EQ(c.problem.x0, -1.0);  // problem default kept
}

TEST(Config, OnlySelectedSectionApplies) {
  const RunConfig c = parse("problem = lattice\n[manufactured]\nn = 8\n[lattice]\nn = 12\n");
  EXPECT_EQ(c.problem.kind, ProblemKind::lattice);
  EXPECT_EQ(c.problem.nx, 12);
}

TEST(Config, RejectsUnknownKeysEverywhere) {
  EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("[manufactured]\nbogus = 1\n"), ConfigError);
  // keys of a section that is not run are still checked
  EXPECT_THROW(parse("problem = manufactured\n[lattice]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("[nonsense]\nn = 4\n"), ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse("[manufactured]\nn = 12x\n"), ConfigError);
  EXPECT_THROW(parse("[manufactured]\neps = -1\n"), ConfigError);
  EXPECT_THROW(parse("[manufactured]\nmass_projection = maybe\n"), ConfigError);
  EXPECT_THROW(parse("solver = quantum\n"), ConfigError);
  EXPECT_THROW(parse("solver = lowrank-split\ntree = unsplit\n"), ConfigError);
  EXPECT_THROW(parse("just words\n"), ConfigError);
  EXPECT_THROW(parse("[manufactured]\n[lattice]\n"), ConfigError);  // ambiguous problem
}

TEST(Config, ErrorsCarryTheLine) {
  try {
    parse("\n\n[manufactured]\nnx = oops\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Config, FullgridKeepsItsTree) {
  const RunConfig c = parse("solver = fullgrid\ntree = split\n");
  EXPECT_EQ(c.solver, SolverKind::fullgrid);
  EXPECT_EQ(c.problem.tree, TreeKind::split);
}

TEST(Config, SchemeAliases) {
  EXPECT_EQ(parse("scheme = low-order\n").problem.scheme, Scheme::muscl2);
  EXPECT_EQ(parse("scheme = weno5\n").problem.scheme, Scheme::weno5);
}

TEST(Config, SchemePicksTableauUnlessOverridden) {
  EXPECT_EQ(parse("scheme = low-order\n").problem.tableau, "imex111");
  EXPECT_EQ(parse("scheme = high-order\n").problem.tableau, "ars443");
  EXPECT_EQ(parse("scheme = low-order\n[manufactured]\ntableau = ars443\n").problem.tableau, "ars443");
}

TEST(Config, WriteParseRoundTripIsExact) {
  RunConfig c;
  c.problem = lattice(20, 6);
  c.problem.eps = 1.0 / 3.0;
  c.problem.rel_tol_g = 0.1 + 0.2;
  c.problem.mass_projection = true;
  c.solver = SolverKind::fullgrid;
  c.problem.tree = TreeKind::split;
  c.slice_y = 4.046875;
  c.output = "somewhere/else";
  std::ostringstream a;
  write_config(c, a);
  const RunConfig back = parse(a.str());
  std::ostringstream b;
  write_config(back, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.problem.eps, c.problem.eps);
  EXPECT_EQ(back.problem.rel_tol_g, c.problem.rel_tol_g);
  EXPECT_EQ(*back.slice_y, *c.slice_y);
}

TEST(Config, ApplyKeyProblemResetsKnobsButKeepsSolver) {
  RunConfig c;
  apply_key(c, "solver", "lowrank-split");
  apply_key(c, "n", "40");
  apply_key(c, "problem", "lattice");
  EXPECT_EQ(c.problem.kind, ProblemKind::lattice);
  EXPECT_EQ(c.problem.nx, lattice(32).nx);
  EXPECT_EQ(c.problem.tree, TreeKind::split);
  c.validate();
}

TEST(ArrayFormat, HeaderBytesAndRoundTrip) {
  Eigen::MatrixXd rho(3, 2);
  rho << 1, 2, 3, 4, 5, 6;
  const fs::path dir = scratch("array");
  fs::create_directories(dir);
  const auto path = (dir / "a.bin").string();
  write_density(path, rho);
  const std::string bytes = slurp(path);
  ASSERT_EQ(bytes.size(), 8u + 8 * 4 + 8 * 6);
  EXPECT_EQ(bytes.substr(0, 8), "LRTARR01");
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(bytes[off + b]);
    return v;
  };
  EXPECT_EQ(u64(8), 1u);   // version
  EXPECT_EQ(u64(16), 2u);  // rank
  EXPECT_EQ(u64(24), 3u);  // nx
  EXPECT_EQ(u64(32), 2u);  // ny
  // row-major: the second value is rho(0, 1)
  double second;
  std::memcpy(&second, bytes.data() + 48, 8);
  EXPECT_EQ(second, 2.0);
  EXPECT_EQ(read_density(path), rho);
}

TEST(ArrayFormat, RejectsGarbage) {
  std::istringstream in(std::string("NOTARRAY") + std::string(32, '\0'));
  EXPECT_THROW(read_array(in), std::runtime_error);
  std::ostringstream out;
  EXPECT_THROW(write_array(out, ArrayFile{{2, 2}, {1.0}}), std::invalid_argument);
}

TEST(Slices, NearestLineIsPeriodicAndRecorded) {
  EXPECT_EQ(nearest_line(0.5, 0.0, 0.1, 10), 5);
  EXPECT_EQ(nearest_line(0.99, 0.0, 0.1, 10), 0);  // wraps onto x = 0
  const ProblemConfig lat = lattice(32);
  const SliceLines s = slice_lines(lat, 4.046875);
  EXPECT_NEAR(s.y_line, lat.y(s.j_line), 0.0);
  EXPECT_LE(std::abs(s.y_line - 4.046875), 0.5 * lat.dy() + 1e-15);
  EXPECT_EQ(s.x_mid, 3.5);
}

TEST(Slices, FloorOnlyInTheFloorColumn) {
  ProblemConfig c = manufactured(1.0, 4);
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(4, 4, -1.0);
  std::ostringstream out;
  write_slices(out, rho, c, slice_lines(c, 0.5));
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.rows.size(), 8u);
  EXPECT_EQ(std::stod(t.rows[0][4]), -1.0);
  EXPECT_EQ(std::stod(t.rows[0][5]), kSliceFloor);
}

TEST(Driver, RunWritesEveryArtifactWithStableSchemas) {
  const fs::path dir = scratch("schema");
  const RunResult r = run(small_run(dir));
  for (const char* f : {"density.bin", "slices.csv", "diag.csv", "spectra.csv", "timing.csv", "manifest.cfg"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  EXPECT_EQ(read_density((dir / "density.bin").string()), r.rho);

  const CsvTable diag = read_csv((dir / "diag.csv").string());
  EXPECT_EQ(diag.header, (std::vector<std::string>{"step", "t", "ranks", "rho_ranks", "ndofs_g", "ndofs_rho",
                                                   "compression", "mass_rho", "mass_eps_g", "zero_density",
                                                   "cap_reached"}));
  ASSERT_EQ(diag.rows.size(), 4u);
  double prev_t = -1.0;
  for (const auto& row : diag.rows) {
    const double t = std::stod(row[1]);
    EXPECT_GT(t, prev_t);
    prev_t = t;
    std::stringstream ranks(row[2]);
    std::string r;
    int count = 0;
    while (std::getline(ranks, r, ';')) {
      EXPECT_GE(std::stol(r), 1);
      ++count;
    }
    EXPECT_EQ(count, 5);
  }

  const CsvTable spectra = read_csv((dir / "spectra.csv").string());
  EXPECT_EQ(spectra.header, (std::vector<std::string>{"node", "label", "index", "sigma", "relative"}));
  EXPECT_FALSE(spectra.rows.empty());
  for (const auto& row : spectra.rows) {
    EXPECT_LE(std::stod(row[4]), 1.0 + 1e-15);
    EXPECT_GE(std::stod(row[4]), 0.0);
  }

  const CsvTable slices = read_csv((dir / "slices.csv").string());
  EXPECT_EQ(slices.rows.size(), 32u);
  const CsvTable timing = read_csv((dir / "timing.csv").string());
  EXPECT_EQ(timing.rows.size(), 4u);

  const RunConfig m = load_config((dir / "manifest.cfg").string());
  EXPECT_EQ(m.problem.steps, 3);
  EXPECT_EQ(m.output, dir.string());
}

TEST(Driver, RerunIsByteIdentical) {
  const fs::path dir = scratch("determinism");
  for (SolverKind solver : {SolverKind::lowrank_unsplit, SolverKind::fullgrid}) {
    RunConfig c = small_run(dir);
    c.solver = solver;
    run(c);
    std::vector<std::string> first;
    for (const char* f : kDeterministicFiles) first.push_back(slurp(dir / f));
    run(c);
    for (std::size_t k = 0; k < first.size(); ++k) EXPECT_EQ(first[k], slurp(dir / kDeterministicFiles[k])) << kDeterministicFiles[k];
  }
}

TEST(Driver, ManifestRerunReproducesOutputs) {
  const fs::path a = scratch("manifest");
  RunConfig c = small_run(a);
  c.solver = SolverKind::lowrank_split;
  c.problem.tree = TreeKind::split;
  run(c);
  const std::string before = slurp(a / "density.bin") + slurp(a / "diag.csv") + slurp(a / "manifest.cfg");
  run(load_config((a / "manifest.cfg").string()));
  const std::string after = slurp(a / "density.bin") + slurp(a / "diag.csv") + slurp(a / "manifest.cfg");
  EXPECT_EQ(before, after);
}

TEST(Driver, FullgridAndLowrankAgreeAtTightTolerance) {
  for (SolverKind lr : {SolverKind::lowrank_unsplit, SolverKind::lowrank_split}) {
    RunConfig c = small_run(scratch("agree"));
    c.problem.rel_tol_g = 1e-14;
    c.solver = lr;
    c.problem.tree = lr == SolverKind::lowrank_split ? TreeKind::split : TreeKind::unsplit;
    const RunResult low = simulate(c);
    c.solver = SolverKind::fullgrid;
    const RunResult full = simulate(c);
    EXPECT_LE((low.rho - full.rho).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(full.diag.back().ranks.empty());
    // same formula as the low-rank path: (g + rho entries) / (g entries), 32 ordinates
    EXPECT_DOUBLE_EQ(full.diag.back().compression, 1.0 + 1.0 / 32.0);
    EXPECT_NEAR(full.l1_error, low.l1_error, 1e-9);
  }
}

TEST(Driver, ConvergenceOrdersAreLog2Ratios) {
  RunConfig c;
  c.problem = manufactured(1.0, 8, 4);
  c.problem.t_final = 0.01;
  const auto rows = convergence(c, {8, 16});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].order));
  EXPECT_DOUBLE_EQ(rows[1].order, std::log2(rows[0].error / rows[1].error));
  EXPECT_GT(rows[1].order, 3.0);
  std::ostringstream out;
  write_convergence_csv(out, rows);
  std::istringstream in(out.str());
  EXPECT_EQ(read_csv(in).rows.size(), 2u);
}

TEST(Driver, ConvergenceRejectsBadInput) {
  RunConfig c;
  EXPECT_THROW(convergence(c, {16}), std::invalid_argument);
  c.problem = lattice(8);
  EXPECT_THROW(convergence(c, {8, 16}), std::invalid_argument);
}

TEST(Driver, SweepAggregatesEveryPointAndIgnoresThreadCount) {
  RunConfig c = small_run(scratch("sweep1"));
  const std::vector<SweepAxis> grid = {parse_sweep_axis("n=8,12"), parse_sweep_axis("solver=lowrank-unsplit,lowrank-split")};
  const auto serial = sweep(c, grid, 1);
  ASSERT_EQ(serial.size(), 4u);
  EXPECT_EQ(serial[1].assignment[1].second, "lowrank-split");
  EXPECT_EQ(serial[2].assignment[0].second, "12");
  const CsvTable agg = read_csv((fs::path(c.output) / "aggregate.csv").string());
  EXPECT_EQ(agg.header[0], "point");
  EXPECT_EQ(agg.header[1], "n");
  EXPECT_EQ(agg.rows.size(), 4u * 4u);

  RunConfig c2 = small_run(scratch("sweep2"));
  sweep(c2, grid, 3);
  EXPECT_EQ(slurp(fs::path(c.output) / "aggregate.csv"), slurp(fs::path(c2.output) / "aggregate.csv"));
  for (int p = 0; p < 4; ++p) {
    char name[16];
    std::snprintf(name, sizeof name, "point_%03d", p);
    EXPECT_EQ(slurp(fs::path(c.output) / name / "density.bin"), slurp(fs::path(c2.output) / name / "density.bin"));
  }
}

TEST(Driver, SweepAxisParsing) {
  const SweepAxis a = parse_sweep_axis("eps=1,0.01");
  EXPECT_EQ(a.key, "eps");
  EXPECT_EQ(a.values, (std::vector<std::string>{"1", "0.01"}));
  EXPECT_THROW(parse_sweep_axis("eps"), ConfigError);
  EXPECT_THROW(parse_sweep_axis("eps=1,,2"), ConfigError);
  RunConfig c = small_run(scratch("sweep_bad"));
  EXPECT_THROW(sweep(c, {parse_sweep_axis("bogus=1")}), ConfigError);
}

TEST(Driver, ThreadCountFromEnvironment) {
  ::unsetenv("LRT_THREADS");
  EXPECT_EQ(thread_count_from_env(), 1);
  ::setenv("LRT_THREADS", "4", 1);
  EXPECT_EQ(thread_count_from_env(), 4);
  ::setenv("LRT_THREADS", "four", 1);
  EXPECT_THROW(thread_count_from_env(), ConfigError);
  ::unsetenv("LRT_THREADS");
}
