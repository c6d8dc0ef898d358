#include "lrt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace lrt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // P_n = p1, P_{n-1} = p0
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    // refresh the derivative at the converged root for the weight
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    gl.nodes[n - 1 - i] = x;
    gl.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

AngularQuadrature::AngularQuadrature(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  const int n = order;
  const auto gl = gauss_legendre(n);
  theta_.resize(2 * n);
  w_theta_ = Vec::Constant(2 * n, std::numbers::pi / n);
  for (int k = 0; k < 2 * n; ++k) theta_(k) = (2.0 * (k + 1) - 1.0) * std::numbers::pi / (2.0 * n);
  mu_ = Eigen::Map<const Vec>(gl.nodes.data(), n);
  w_mu_ = Eigen::Map<const Vec>(gl.weights.data(), n);
  cos_ = theta_.array().cos();
  sin_ = theta_.array().sin();
  cos_p_ = cos_.cwiseMax(0.0);
  cos_m_ = cos_.cwiseMin(0.0);
  sin_p_ = sin_.cwiseMax(0.0);
  sin_m_ = sin_.cwiseMin(0.0);
  s_ = (1.0 - mu_.array().square()).sqrt();
  xi_ = cos_ * s_.transpose();
  eta_ = sin_ * s_.transpose();
  xi_p_ = xi_.cwiseMax(0.0);
  xi_m_ = xi_.cwiseMin(0.0);
  eta_p_ = eta_.cwiseMax(0.0);
  eta_m_ = eta_.cwiseMin(0.0);
}

double AngularQuadrature::average(const Mat& values) const {
  if (values.rows() != n_theta() || values.cols() != n_mu())
    throw std::invalid_argument("ordinate values do not match quadrature layout");
  return (w_theta_.transpose() * values * w_mu_)(0, 0) / (4.0 * std::numbers::pi);
}

double AngularQuadrature::average(std::span<const double> flat) const {
  if (static_cast<Eigen::Index>(flat.size()) != size())
    throw std::invalid_argument("ordinate values do not match quadrature layout");
  double s = 0.0;
  for (Eigen::Index k = 0; k < n_theta(); ++k)
    for (Eigen::Index l = 0; l < n_mu(); ++l) s += w_theta_(k) * w_mu_(l) * flat[k * n_mu() + l];
  return s / (4.0 * std::numbers::pi);
}

AngularQuadrature cl_quadrature(int order) { return AngularQuadrature(order); }

FirstMoments first_moments(const AngularQuadrature& q, const Mat& values) {
  return {q.average(Mat(q.xi().cwiseProduct(values))), q.average(Mat(q.eta().cwiseProduct(values)))};
}

double sphere_monomial_average(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw std::invalid_argument("negative exponent");
  if (a % 2 || b % 2 || c % 2) return 0.0;
  auto dfact = [](int m) {
    double r = 1.0;
    for (int k = m; k > 1; k -= 2) r *= k;
    return r;
  };
  return dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1);
}

void write_quadrature_csv(const AngularQuadrature& q, std::ostream& out) {
  out << "k,l,theta,mu,xi,eta,w\n";
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < q.n_theta(); ++k)
    for (Eigen::Index l = 0; l < q.n_mu(); ++l)
      out << k + 1 << ',' << l + 1 << ',' << q.theta()(k) << ',' << q.mu()(l) << ',' << q.xi()(k, l) << ','
          << q.eta()(k, l) << ',' << q.theta_weights()(k) * q.mu_weights()(l) << '\n';
}

}  // namespace lrt
