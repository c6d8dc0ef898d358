#pragma once

#include "lrt/dense_tensor.hpp"
#include "lrt/discretization.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace lrt {

inline constexpr Index kFullGridMemoryGuard = Index{1} << 28;

// g is stored as an n_xy x (n_theta * n_mu) matrix: rows x fastest, columns
// theta fastest, i.e. the DenseTensor layout (x, y, theta, mu).
struct DenseState {
  double t = 0.0;
  int step = 0;
  Eigen::MatrixXd rho;
  Eigen::MatrixXd g;
};

class FullGridSolver {
 public:
  explicit FullGridSolver(const Discretization& d, Index memory_guard = kFullGridMemoryGuard);

  const Discretization& disc() const { return d_; }
  DenseState initial_state() const;
  void step(DenseState& s) const;

  // (1/4pi) sum_a w_a g(:, a) as an nx x ny field
  Eigen::MatrixXd angular_average(const Eigen::MatrixXd& g) const;
  double zero_density_ratio(const Eigen::MatrixXd& g) const;
  double initial_mass() const { return m0_; }

  // Dense evaluation of separable terms on the grid.
  Eigen::MatrixXd sample(const std::vector<SampledTerm>& terms) const;

 private:
  struct Flux {
    bool empty = true;
    Eigen::MatrixXd ge;
    std::array<Eigen::MatrixXd, 4> pieces;
    Eigen::MatrixXd moment_flux;
  };
  Flux flux(const std::vector<Eigen::MatrixXd>& g, int stage) const;
  std::array<Eigen::MatrixXd, 4> derivatives(const Eigen::MatrixXd& ge) const;

  const Discretization& d_;
  Eigen::VectorXd avg_w_;                  // w_theta[k] w_mu[l] / 4pi, theta fastest
  std::array<Eigen::VectorXd, 4> upwind_;  // xi+, xi-, eta+, eta- per ordinate
  std::array<Eigen::VectorXd, 4> alt_;     // xi-, xi+, eta-, eta+ per ordinate
  Eigen::MatrixXd fluct_;
  double m0_ = 0.0;
};

// (x, y, theta, mu) dense tensor view of a state's g.
DenseTensor to_dense_tensor(const DenseState& s, const Discretization& d);

}  // namespace lrt
