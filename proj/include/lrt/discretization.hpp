#pragma once

#include "lrt/imex.hpp"
#include "lrt/problems.hpp"
#include "lrt/quadrature.hpp"
#include "lrt/stencil.hpp"
#include "lrt/tensor_tree.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace lrt {

// coeff * space (x) (theta_part theta_part^T-style outer) over the ordinates
struct SampledTerm {
  double coeff = 1.0;
  Eigen::MatrixXd space;    // nx x ny
  Eigen::VectorXd theta;    // n_theta
  Eigen::VectorXd mu;       // n_mu
};

// Everything both steppers share: grid, quadrature, materials, tableau,
// stencils, per-stage stiff factors and the sampled source.
struct Discretization {
  ProblemConfig cfg;
  ProblemData data;
  AngularQuadrature quad;
  DimensionTree tree;
  ButcherPair tableau;
  double dt = 0.0;
  int n_steps = 0;

  Eigen::MatrixXd sigma_s, sigma_a;
  bool absorbing = false;      // sigma_a nonzero somewhere
  bool uniform_sigma_s = false;

  DerivativeOperator dxm, dxp, dym, dyp;

  // eps^2 / (eps^2 + a_ll dt sigma_s) for every stage
  std::vector<Eigen::MatrixXd> stiff_factor;
  std::vector<bool> stiff_factor_uniform;

  Eigen::MatrixXd rho0;
  std::vector<SampledTerm> g0;

  // Q = tau(t) * sum terms; <Q> = tau(t) * qbar; the fluctuation terms carry
  // the angular part minus its average.
  bool has_source = false;
  bool has_fluctuation = false;
  Eigen::MatrixXd qbar;
  std::vector<SampledTerm> source;
  std::vector<SampledTerm> fluctuation;
  double source_time(double t) const { return has_source ? data.source_time(t) : 0.0; }

  int theta_leaf() const { return tree.leaf_of(2); }
  int mu_leaf() const { return tree.leaf_of(3); }
  int x_leaf() const { return tree.leaf_of(0); }
  int y_leaf() const { return tree.leaf_of(1); }
  Index nx() const { return cfg.nx; }
  Index ny() const { return cfg.ny; }
  Index n_xy() const { return static_cast<Index>(cfg.nx) * cfg.ny; }
  double cell_area() const { return cfg.dx() * cfg.dy(); }
  double mass(const Eigen::MatrixXd& rho) const { return rho.sum() * cell_area(); }
  Index full_dofs() const { return n_xy() * quad.n_theta() * quad.n_mu(); }
};

Discretization discretize(const ProblemConfig& cfg);
ButcherPair resolve_tableau(const std::string& name_or_path);

// D-x, D+x, D-y, D+y of the density. The weights follow the same ensemble
// rule as the g fluxes: smoothness measures normalized by ||rho||^2, per line
// for the unsplit tree, shared along each axis for the split tree.
std::array<Eigen::MatrixXd, 4> density_derivatives(const Discretization& d, const Eigen::MatrixXd& rho);

// Ordinate values of an angular separable part, n_theta x n_mu.
Eigen::MatrixXd angular_values(const SampledTerm& t);

}  // namespace lrt
