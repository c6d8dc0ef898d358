#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace lrt {

struct GaussLegendre {
  std::vector<double> nodes;  // ascending
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

// Chebyshev-Legendre product rule on the unit sphere: 2N equispaced azimuthal
// midpoints times N Gauss-Legendre polar cosines, 2N^2 ordinates. Matrices are
// indexed (k, l) = (theta index, mu index); the flat layout is theta-major,
// index k*N + l.
class AngularQuadrature {
 public:
  AngularQuadrature() : AngularQuadrature(1) {}
  explicit AngularQuadrature(int order);

  int order() const { return order_; }
  Eigen::Index n_theta() const { return theta_.size(); }
  Eigen::Index n_mu() const { return mu_.size(); }
  Eigen::Index size() const { return n_theta() * n_mu(); }

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  // w_{k,l} = w_theta[k] * w_mu[l]
  const Eigen::VectorXd& theta_weights() const { return w_theta_; }
  const Eigen::VectorXd& mu_weights() const { return w_mu_; }
  Eigen::MatrixXd weights() const { return w_theta_ * w_mu_.transpose(); }

  // Separable direction factors: xi = cos(theta) s(mu), eta = sin(theta) s(mu)
  // with s(mu) = sqrt(1 - mu^2) >= 0, so the wind splits factor exactly.
  const Eigen::VectorXd& cos_theta() const { return cos_; }
  const Eigen::VectorXd& sin_theta() const { return sin_; }
  const Eigen::VectorXd& cos_plus() const { return cos_p_; }
  const Eigen::VectorXd& cos_minus() const { return cos_m_; }
  const Eigen::VectorXd& sin_plus() const { return sin_p_; }
  const Eigen::VectorXd& sin_minus() const { return sin_m_; }
  const Eigen::VectorXd& polar_sine() const { return s_; }

  const Eigen::MatrixXd& xi() const { return xi_; }
  const Eigen::MatrixXd& eta() const { return eta_; }
  const Eigen::MatrixXd& xi_plus() const { return xi_p_; }
  const Eigen::MatrixXd& xi_minus() const { return xi_m_; }
  const Eigen::MatrixXd& eta_plus() const { return eta_p_; }
  const Eigen::MatrixXd& eta_minus() const { return eta_m_; }

  // <v> = (1/4pi) sum w_{k,l} v_{k,l}
  double average(const Eigen::MatrixXd& values) const;
  double average(std::span<const double> flat_values) const;

 private:
  int order_;
  Eigen::VectorXd theta_, mu_, w_theta_, w_mu_;
  Eigen::VectorXd cos_, sin_, cos_p_, cos_m_, sin_p_, sin_m_, s_;
  Eigen::MatrixXd xi_, eta_, xi_p_, xi_m_, eta_p_, eta_m_;
};

AngularQuadrature cl_quadrature(int order);

struct FirstMoments {
  double xi;
  double eta;
};
FirstMoments first_moments(const AngularQuadrature& q, const Eigen::MatrixXd& values);

// Exact average of xi^a eta^b mu^c over the unit sphere.
double sphere_monomial_average(int a, int b, int c);

// CSV with columns k,l,theta,mu,xi,eta,w (1-based k and l).
void write_quadrature_csv(const AngularQuadrature& q, std::ostream& out);

}  // namespace lrt
