#pragma once

#include <Eigen/Dense>

#include <array>
#include <utility>
#include <vector>

namespace lrt {

enum class Scheme { weno5, muscl2 };
// minus: left-biased reconstruction (D^-), plus: right-biased (D^+)
enum class Bias { minus, plus };
enum class Axis { x, y };

// Periodic conservative difference (D f)_i = (F_{i+1/2} - F_{i-1/2}) / h whose
// interface fluxes are fixed linear combinations of five neighbouring values.
class FrozenStencil {
 public:
  FrozenStencil(Eigen::Index n, double h, Bias bias, std::vector<std::array<double, 5>> coeffs);

  Eigen::Index size() const { return n_; }
  // out[i*so] = (D in)_i for in[i*si], i < n
  void apply(const double* in, Eigen::Index si, double* out, Eigen::Index so) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& cols) const;
  Eigen::MatrixXd matrix() const;

 private:
  Eigen::Index n_;
  double h_;
  int offset_;  // first stencil point relative to i for interface i+1/2
  std::vector<std::array<double, 5>> coeffs_;
};

using Moment5 = Eigen::Matrix<double, 5, 5>;

// WENO5 / MUSCL-minmod upwind-biased derivative. The nonlinear weights are
// computed from an indicator; apply() uses the data itself, freeze() takes any
// indicator and returns the resulting linear operator.
class DerivativeOperator {
 public:
  DerivativeOperator() = default;
  DerivativeOperator(Eigen::Index n, double h, Bias bias, Scheme scheme);

  Eigen::Index size() const { return n_; }
  double spacing() const { return h_; }
  Bias bias() const { return bias_; }
  Scheme scheme() const { return scheme_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  FrozenStencil freeze(const double* indicator, Eigen::Index stride = 1) const;
  FrozenStencil freeze(const Eigen::VectorXd& indicator) const { return freeze(indicator.data()); }

  // Weights from an ensemble of lines: the rows of `factor` at offset +
  // stride * p hold the values at grid point p, one column per line, and the
  // smoothness measures are the scaled sums over all columns. A single column
  // gives freeze() of that column.
  FrozenStencil freeze_ensemble(const Eigen::MatrixXd& factor, Eigen::Index offset, Eigen::Index stride,
                                double scale) const;

  // Reconstruction coefficients on v = (v0..v4) where v2 is the upwind cell.
  static std::array<double, 5> interface_weights(Scheme scheme, const std::array<double, 5>& v);
  // Same, from the window moment sum_lines v v^T; equal to the above for v v^T.
  static std::array<double, 5> interface_weights(Scheme scheme, const Moment5& m);

 private:
  Eigen::Index n_ = 0;
  double h_ = 0.0;
  Bias bias_ = Bias::minus;
  Scheme scheme_ = Scheme::weno5;
};

std::pair<DerivativeOperator, DerivativeOperator> build_pair(Eigen::Index n, double h, Scheme scheme);

// Frozen derivative of a periodic nx x ny field (x fastest) along one axis;
// every grid line owns a frozen stencil.
class FieldDerivative {
 public:
  // weights from a 2-D indicator, line by line
  FieldDerivative(const DerivativeOperator& op, Axis axis, const Eigen::MatrixXd& indicator);
  // weights from a 1-D profile along the axis, shared by every line
  FieldDerivative(const DerivativeOperator& op, Axis axis, const Eigen::VectorXd& profile,
                  Eigen::Index n_other);

  // weights from the ensemble of all lines through each grid line: factor is
  // (nx*ny) x k with factor factor^T = A A^T for the flattened data A
  static FieldDerivative ensemble(const DerivativeOperator& op, Axis axis, const Eigen::MatrixXd& factor,
                                  Eigen::Index nx, Eigen::Index ny, double scale);

  Axis axis() const { return axis_; }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& field) const;
  // Each column is a flattened field of size nx*ny.
  Eigen::MatrixXd apply_flat(const Eigen::MatrixXd& columns) const;
  // The stencil of line j (for shared profiles all lines coincide).
  const FrozenStencil& line(Eigen::Index j) const { return lines_[shared_ ? 0 : j]; }

 private:
  FieldDerivative() = default;
  void apply_one(const double* in, double* out) const;
  Axis axis_ = Axis::x;
  Eigen::Index nx_ = 0, ny_ = 0;
  bool shared_ = false;
  std::vector<FrozenStencil> lines_;
};

// Classical derivative of a dense field along an axis (indicator = the field).
Eigen::MatrixXd derivative(const DerivativeOperator& op, Axis axis, const Eigen::MatrixXd& field);

}  // namespace lrt
