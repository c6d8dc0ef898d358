#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace lrt {

// Explicit/implicit Runge-Kutta pair. Rows of a_exp are strictly lower
// triangular, rows of a_imp lower triangular.
struct ButcherPair {
  std::string name;
  int stages = 0;
  Eigen::MatrixXd a_exp, a_imp;
  Eigen::VectorXd b_exp, b_imp;
  Eigen::VectorXd c_exp, c_imp;  // row sums

  // Validates the triangular structure and computes the abscissae.
  static ButcherPair make(std::string name, Eigen::MatrixXd a_exp, Eigen::MatrixXd a_imp,
                          Eigen::VectorXd b_exp, Eigen::VectorXd b_imp);

  // Weights equal the last rows of both tables.
  bool is_gsa() const;
  // Every stage that needs a stiff solve has a positive diagonal entry and the
  // block that is solved for is invertible.
  bool implicit_part_invertible() const;
};

ButcherPair imex111();
ButcherPair ars_gsa_3();  // ARS(4,4,3)

struct OrderResidual {
  std::string name;
  int order;
  double value;
};
std::vector<OrderResidual> order_conditions(const ButcherPair& pair, int p);

// Text format (see docs/formats.md): "name", "stages", then the blocks
// "explicit", "explicit_weights", "implicit", "implicit_weights" with
// whitespace-separated entries; entries may be fractions such as 3/4.
ButcherPair parse_tableau(std::istream& in);
ButcherPair load_tableau(const std::string& path);
void write_tableau(const ButcherPair& pair, std::ostream& out);

// One step of y' = f(t, y) + L y + h(t) with f treated explicitly and the
// linear part implicitly.
struct ImexStep {
  Eigen::VectorXd last_stage;
  Eigen::VectorXd weighted;  // y + dt sum_j (b~_j F_j + b_j G_j)
};
ImexStep imex_step(const ButcherPair& pair, double t, double dt, const Eigen::VectorXd& y,
                   const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f_explicit,
                   const Eigen::MatrixXd& l_implicit,
                   const std::function<Eigen::VectorXd(double)>& h_implicit);

}  // namespace lrt
