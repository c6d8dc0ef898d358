#include "lrt/fullgrid.hpp"

#include "lrt/transport_solver.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace lrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

// theta-fastest flattening of a per-ordinate (k, l) product a[k] * b[l]
Vec ordinate_product(const Vec& a, const Vec& b) {
  const Mat m = a * b.transpose();
  return Eigen::Map<const Vec>(m.data(), m.size());
}

// Rows y, columns (x, ordinate) with x fastest: the y matricization.
Mat y_lines(const Mat& g, Index nx, Index ny) {
  const Index na = g.cols();
  Mat out(ny, nx * na);
  for (Index a = 0; a < na; ++a)
    out.middleCols(a * nx, nx) = Eigen::Map<const Mat>(g.col(a).data(), nx, ny).transpose();
  return out;
}

Mat from_y_lines(const Mat& yl, Index nx, Index ny, Index na) {
  Mat out(nx * ny, na);
  for (Index a = 0; a < na; ++a)
    Eigen::Map<Mat>(out.col(a).data(), nx, ny) = yl.middleCols(a * nx, nx).transpose();
  return out;
}

double inverse_energy(const Mat& v) {
  const double n2 = v.squaredNorm();
  return n2 > 0.0 ? 1.0 / n2 : 0.0;
}

}  // namespace

FullGridSolver::FullGridSolver(const Discretization& d, Index memory_guard) : d_(d) {
  const Index entries = d_.full_dofs();
  if (entries > memory_guard)
    throw std::length_error("full grid needs " + std::to_string(entries) + " entries, guard is " +
                            std::to_string(memory_guard));
  const auto& q = d_.quad;
  avg_w_ = ordinate_product(q.theta_weights(), q.mu_weights()) / (4.0 * std::numbers::pi);
  const Vec& s = q.polar_sine();
  upwind_ = {ordinate_product(q.cos_plus(), s), ordinate_product(q.cos_minus(), s), ordinate_product(q.sin_plus(), s),
             ordinate_product(q.sin_minus(), s)};
  alt_ = {ordinate_product(q.cos_minus(), s), ordinate_product(q.cos_plus(), s), ordinate_product(q.sin_minus(), s),
          ordinate_product(q.sin_plus(), s)};
  if (d_.has_fluctuation) fluct_ = sample(d_.fluctuation);
  m0_ = d_.mass(d_.rho0);
}

Mat FullGridSolver::sample(const std::vector<SampledTerm>& terms) const {
  Mat out = Mat::Zero(d_.n_xy(), d_.quad.size());
  for (const auto& t : terms) {
    const Vec sp = Eigen::Map<const Vec>(t.space.data(), t.space.size());
    out.noalias() += t.coeff * sp * ordinate_product(t.theta, t.mu).transpose();
  }
  return out;
}

DenseState FullGridSolver::initial_state() const {
  DenseState s;
  s.rho = d_.rho0;
  s.g = sample(d_.g0);
  return s;
}

Mat FullGridSolver::angular_average(const Mat& g) const {
  const Vec v = g * avg_w_;
  return Eigen::Map<const Mat>(v.data(), d_.nx(), d_.ny());
}

double FullGridSolver::zero_density_ratio(const Mat& g) const {
  const double n = g.norm();
  return n == 0.0 ? 0.0 : (g * avg_w_).norm() / n;
}

std::array<Mat, 4> FullGridSolver::derivatives(const Mat& ge) const {
  const Index nx = d_.nx(), ny = d_.ny(), na = ge.cols();
  const double sc = inverse_energy(ge);
  std::array<Mat, 4> out;
  if (d_.tree.kind() == TreeKind::unsplit) {
    // the {x,y} matricization is ge itself
    const DerivativeOperator* ops[] = {&d_.dxm, &d_.dxp, &d_.dym, &d_.dyp};
    for (int k = 0; k < 4; ++k)
      out[k] = FieldDerivative::ensemble(*ops[k], k < 2 ? Axis::x : Axis::y, ge, nx, ny, sc).apply_flat(ge);
    return out;
  }
  // one stencil per axis, shared by all lines of that axis
  const Eigen::Map<const Mat> xl(ge.data(), nx, ny * na);
  const Mat yl = y_lines(ge, nx, ny);
  for (int k = 0; k < 2; ++k) {
    const auto& op = k == 0 ? d_.dxm : d_.dxp;
    const Mat r = op.freeze_ensemble(xl, 0, 1, sc).apply_columns(xl);
    out[k] = Eigen::Map<const Mat>(r.data(), nx * ny, na);
  }
  for (int k = 2; k < 4; ++k) {
    const auto& op = k == 2 ? d_.dym : d_.dyp;
    out[k] = from_y_lines(op.freeze_ensemble(yl, 0, 1, sc).apply_columns(yl), nx, ny, na);
  }
  return out;
}

FullGridSolver::Flux FullGridSolver::flux(const std::vector<Mat>& g, int stage) const {
  Flux f;
  const Mat& a = d_.tableau.a_exp;
  for (int j = 0; j < stage; ++j) {
    if (a(stage, j) == 0.0) continue;
    if (f.empty) {
      f.ge = a(stage, j) * g[j];
      f.empty = false;
    } else {
      f.ge += a(stage, j) * g[j];
    }
  }
  if (f.empty) return f;
  const auto moved = derivatives(f.ge);
  Vec m = Vec::Zero(d_.n_xy());
  for (int k = 0; k < 4; ++k) {
    f.pieces[k] = moved[k] * upwind_[k].asDiagonal();
    m += f.pieces[k] * avg_w_;
  }
  f.moment_flux = Eigen::Map<const Mat>(m.data(), d_.nx(), d_.ny());
  return f;
}

void FullGridSolver::step(DenseState& s) const {
  const auto& p = d_.tableau;
  const auto& cfg = d_.cfg;
  const double dt = d_.dt, eps = cfg.eps, e2 = eps * eps;
  const Index nxy = d_.n_xy();
  auto col = [](const Mat& field) { return Eigen::Map<const Vec>(field.data(), field.size()); };

  std::vector<Mat> rho, g;
  std::vector<std::array<Mat, 4>> drho;
  for (int i = 0; i < p.stages; ++i) {
    const Flux f = flux(g, i);

    Mat r = s.rho;
    if (!f.empty) r -= dt * f.moment_flux;
    for (int j = 0; j < i; ++j) {
      const double c = p.a_exp(i, j);
      if (c == 0.0) continue;
      if (d_.absorbing) r -= dt * c * d_.sigma_a.cwiseProduct(rho[j]);
      if (d_.has_source) r += dt * c * d_.source_time(s.t + p.c_exp(j) * dt) * d_.qbar;
    }
    rho.push_back(r);
    drho.push_back(density_derivatives(d_, r));

    if (p.a_exp.row(i).isZero(0.0) && p.a_imp.row(i).isZero(0.0)) {
      g.push_back(s.g);
      continue;
    }
    Mat acc = s.g;
    if (!f.empty) {
      for (const auto& piece : f.pieces) acc -= dt / eps * piece;
      acc.colwise() += dt / eps * col(f.moment_flux);
      if (d_.absorbing) acc -= dt * col(d_.sigma_a).asDiagonal() * f.ge;
    }
    for (int k = 0; k < 4; ++k) {
      Vec pk = Vec::Zero(nxy);
      for (int j = 0; j <= i; ++j)
        if (p.a_imp(i, j) != 0.0) pk += p.a_imp(i, j) * col(drho[j][k]);
      acc.noalias() -= dt / e2 * pk * alt_[k].transpose();
    }
    Mat gi = Mat::Zero(nxy, g.empty() ? s.g.cols() : g[0].cols());
    bool any_implicit = false;
    for (int j = 0; j < i; ++j)
      if (p.a_imp(i, j) != 0.0) {
        gi += p.a_imp(i, j) * g[j];
        any_implicit = true;
      }
    if (any_implicit) acc -= dt / e2 * col(d_.sigma_s).asDiagonal() * gi;
    if (d_.has_fluctuation) {
      double c = 0.0;
      for (int j = 0; j < i; ++j) c += p.a_exp(i, j) * d_.source_time(s.t + p.c_exp(j) * dt);
      if (c != 0.0) acc += dt / eps * c * fluct_;
    }
    g.push_back(col(d_.stiff_factor[i]).asDiagonal() * acc);
  }

  s.rho = std::move(rho.back());
  s.g = std::move(g.back());
  if (cfg.zero_density_projection) {
    const Vec avg = s.g * avg_w_;
    s.g.colwise() -= avg;
  }
  if (cfg.mass_projection) s.rho = mass_projection(s.rho, m0_, d_.cell_area(), cfg.area());
  s.t += dt;
  ++s.step;
}

DenseTensor to_dense_tensor(const DenseState& s, const Discretization& d) {
  std::vector<double> data(s.g.data(), s.g.data() + s.g.size());
  return DenseTensor({d.nx(), d.ny(), d.quad.n_theta(), d.quad.n_mu()}, std::move(data));
}

}  // namespace lrt
