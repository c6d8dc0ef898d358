#include "lrt/discretization.hpp"

#include <stdexcept>

namespace lrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

ButcherPair resolve_tableau(const std::string& name) {
  if (name == "ars443" || name == "ars_gsa_3") return ars_gsa_3();
  if (name == "imex111") return imex111();
  return load_tableau(name);
}

Mat angular_values(const SampledTerm& t) { return t.theta * t.mu.transpose(); }

std::array<Mat, 4> density_derivatives(const Discretization& d, const Mat& rho) {
  const double n2 = rho.squaredNorm();
  const double sc = n2 > 0.0 ? 1.0 / n2 : 0.0;
  if (d.tree.kind() == TreeKind::unsplit) {
    // rho as the single column of a leaf over {x,y}
    const Mat v = Eigen::Map<const Mat>(rho.data(), rho.size(), 1);
    const auto nx = d.nx(), ny = d.ny();
    return {FieldDerivative::ensemble(d.dxm, Axis::x, v, nx, ny, sc).apply(rho),
            FieldDerivative::ensemble(d.dxp, Axis::x, v, nx, ny, sc).apply(rho),
            FieldDerivative::ensemble(d.dym, Axis::y, v, nx, ny, sc).apply(rho),
            FieldDerivative::ensemble(d.dyp, Axis::y, v, nx, ny, sc).apply(rho)};
  }
  // separate x and y leaves: one stencil per direction shared by all lines
  const Mat rt = rho.transpose();
  return {d.dxm.freeze_ensemble(rho, 0, 1, sc).apply_columns(rho),
          d.dxp.freeze_ensemble(rho, 0, 1, sc).apply_columns(rho),
          d.dym.freeze_ensemble(rt, 0, 1, sc).apply_columns(rt).transpose(),
          d.dyp.freeze_ensemble(rt, 0, 1, sc).apply_columns(rt).transpose()};
}

namespace {

Vec sample_profile(const Profile& f, const Vec& nodes) {
  Vec v(nodes.size());
  for (Index i = 0; i < nodes.size(); ++i) v(i) = f(nodes(i));
  return v;
}

std::vector<SampledTerm> sample_terms(const std::vector<SeparableTerm>& terms, const ProblemConfig& cfg,
                                      const AngularQuadrature& q) {
  std::vector<SampledTerm> out;
  for (const auto& t : terms)
    out.push_back({t.coeff, sample(t.space, cfg), sample_profile(t.theta, q.theta()), sample_profile(t.mu, q.mu())});
  return out;
}

DimensionTree make_tree(const ProblemConfig& c, const AngularQuadrature& q) {
  return c.tree == TreeKind::split ? DimensionTree::split(c.nx, c.ny, q.n_theta(), q.n_mu())
                                   : DimensionTree::unsplit(c.nx, c.ny, q.n_theta(), q.n_mu());
}

}  // namespace

Discretization discretize(const ProblemConfig& cfg) {
  auto data = problem_data(cfg);  // validates
  AngularQuadrature q(cfg.order);
  auto tree = make_tree(cfg, q);
  auto tab = resolve_tableau(cfg.tableau);
  if (!tab.is_gsa()) throw std::invalid_argument("tableau '" + tab.name + "' is not globally stiffly accurate");
  if (!tab.implicit_part_invertible())
    throw std::invalid_argument("tableau '" + tab.name + "' has a singular implicit part");
  Discretization d;
  d.cfg = cfg;
  d.data = std::move(data);
  d.quad = std::move(q);
  d.tree = std::move(tree);
  d.tableau = std::move(tab);
  d.dt = cfg.dt();
  d.n_steps = cfg.n_steps();
  d.dxm = DerivativeOperator(cfg.nx, cfg.dx(), Bias::minus, cfg.scheme);
  d.dxp = DerivativeOperator(cfg.nx, cfg.dx(), Bias::plus, cfg.scheme);
  d.dym = DerivativeOperator(cfg.ny, cfg.dy(), Bias::minus, cfg.scheme);
  d.dyp = DerivativeOperator(cfg.ny, cfg.dy(), Bias::plus, cfg.scheme);
  d.sigma_s = sample(d.data.sigma_s, cfg);
  d.sigma_a = sample(d.data.sigma_a, cfg);
  if (!(d.sigma_s.minCoeff() > 0.0)) throw std::invalid_argument("sigma_s must be positive everywhere");
  if (d.sigma_a.minCoeff() < 0.0) throw std::invalid_argument("sigma_a must be nonnegative");
  d.absorbing = d.sigma_a.maxCoeff() > 0.0;
  d.uniform_sigma_s = d.sigma_s.maxCoeff() == d.sigma_s.minCoeff();

  const double e2 = cfg.eps * cfg.eps;
  for (int l = 0; l < d.tableau.stages; ++l) {
    const double a = d.tableau.a_imp(l, l);
    Mat f = (Mat::Constant(cfg.nx, cfg.ny, e2).array() / (e2 + a * d.dt * d.sigma_s.array())).matrix();
    if (a == 0.0) f.setOnes();
    d.stiff_factor.push_back(f);
    d.stiff_factor_uniform.push_back(d.uniform_sigma_s || a == 0.0);
  }

  d.rho0 = sample(d.data.rho0, cfg);
  d.g0 = sample_terms(d.data.g0, cfg, d.quad);

  d.source = sample_terms(d.data.source, cfg, d.quad);
  d.has_source = !d.source.empty();
  d.qbar = Mat::Zero(cfg.nx, cfg.ny);
  for (const auto& t : d.source) {
    const double avg = d.quad.average(angular_values(t));
    d.qbar += t.coeff * avg * t.space;
    // the fluctuation keeps the angular part minus its mean
    Vec ones_t = Vec::Ones(d.quad.n_theta()), ones_m = Vec::Ones(d.quad.n_mu());
    if ((t.theta.array() == t.theta(0)).all() && (t.mu.array() == t.mu(0)).all()) continue;
    d.fluctuation.push_back({t.coeff, t.space, t.theta, t.mu});
    d.fluctuation.push_back({-t.coeff * avg, t.space, ones_t, ones_m});
  }
  d.has_fluctuation = !d.fluctuation.empty();
  return d;
}

}  // namespace lrt
