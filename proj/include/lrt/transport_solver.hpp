#pragma once

#include "lrt/discretization.hpp"
#include "lrt/tensor_tree.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace lrt {

struct MacroMicroState {
  double t = 0.0;
  int step = 0;
  Eigen::MatrixXd rho;            // working density, nx x ny
  std::optional<HTensor> rho_ht;  // split tree: the stored low-rank density, rho == its dense form
  HTensor g;
};

struct DiagnosticsRow {
  int step = 0;
  double t = 0.0;
  std::vector<Index> ranks;      // hierarchical ranks of g, breadth-first
  std::vector<Index> rho_ranks;  // split tree only
  Index ndofs_g = 0;
  Index ndofs_rho = 0;
  double compression = 0.0;
  double mass_rho = 0.0;
  double mass_eps_g = 0.0;        // |eps * integral of <g>|
  double zero_density = 0.0;      // ||<g>|| / ||g||
  bool cap_reached = false;
  double wall_time = 0.0;
};

// Frozen-weight derivative of g along x and y. The weights come from the
// mean-square energy of the tensor the flux is applied to.
struct GFlux {
  bool empty = true;
  HTensor ge;                        // sum_j a~_lj g^(j)
  std::array<HTensor, 4> pieces;     // xi+ D-x, xi- D+x, eta+ D-y, eta- D+y applied to ge
  Eigen::MatrixXd moment_flux;       // <sum of pieces>, the macro flux
};

// Stage values of the current step.
struct StageData {
  std::vector<Eigen::MatrixXd> rho;
  std::vector<std::array<Eigen::MatrixXd, 4>> drho;  // D-x, D+x, D-y, D+y of rho^(j)
  std::vector<HTensor> g;
  bool cap_reached = false;
};

struct StepReport {
  bool cap_reached = false;
  double zero_density = 0.0;
};

class TransportSolver {
 public:
  explicit TransportSolver(const Discretization& d);

  const Discretization& disc() const { return d_; }
  MacroMicroState initial_state() const;
  StepReport step(MacroMicroState& s) const;

  // stage pieces, exposed for testing
  GFlux g_flux(const StageData& sd, int stage) const;
  Eigen::MatrixXd rho_stage(const MacroMicroState& s, const StageData& sd, int stage, const GFlux& f) const;
  HTensor g_stage(const MacroMicroState& s, const StageData& sd, int stage, const GFlux& f,
                  bool* cap_reached = nullptr) const;
  std::array<Eigen::MatrixXd, 4> density_gradients(const Eigen::MatrixXd& rho) const;
  // (Q - <Q>) as a tensor, without the time factor
  const HTensor& fluctuation() const { return fluct_; }

  DiagnosticsRow diagnostics(const MacroMicroState& s) const;
  double initial_mass() const { return m0_; }

 private:
  void store_rho(MacroMicroState& s, const Eigen::MatrixXd& rho) const;
  const Discretization& d_;
  HTensor fluct_;
  double m0_ = 0.0;
};

// Removes <g>: truncate(g - <g> (x) 1 (x) 1). A leftover mean above 1e-13
// relative is then removed exactly, at the cost of one extra column in the
// theta and mu leaves.
HTensor zero_density_projection(const HTensor& g, const AngularQuadrature& q, double rel_tol,
                                Index max_rank = kDefaultMaxRank, bool* cap_reached = nullptr);
// Exact g - <g> (x) 1 (x) 1 through the angular leaves.
HTensor remove_angular_mean(const HTensor& g, const AngularQuadrature& q);
// ||<g>||_F / ||g||_F
double zero_density_ratio(const HTensor& g, const AngularQuadrature& q);

// rho + (m0 - mass(rho)) / area
Eigen::MatrixXd mass_projection(const Eigen::MatrixXd& rho, double m0, double cell_area, double area);

// sigma (x) 1 (x) 1 times g: row scaling of the {x,y} leaf for the unsplit
// tree, an exact spatial multiply followed by truncation for the split tree.
HTensor apply_cross_section(const Eigen::MatrixXd& sigma, const HTensor& g, double rel_tol,
                            Index max_rank = kDefaultMaxRank);

// sum of SampledTerms as a tensor on the given tree, truncated at rel_tol
HTensor build_tensor(const DimensionTree& tree, const std::vector<SampledTerm>& terms, double rel_tol,
                     Index max_rank = kDefaultMaxRank);

}  // namespace lrt
