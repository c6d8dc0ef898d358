#include "lrt/transport_solver.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

Vec flat(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }


bool is_uniform(const Mat& m) { return m.maxCoeff() == m.minCoeff(); }

double ensemble_scale(const Mat& v) {
  const double n2 = v.squaredNorm();
  return n2 > 0.0 ? 1.0 / n2 : 0.0;
}

struct TermList {
  std::vector<HTensor> tensors;
  std::vector<double> coeffs;
  void push(double c, HTensor t) {
    if (c == 0.0) return;
    coeffs.push_back(c);
    tensors.push_back(std::move(t));
  }
  std::vector<Term> terms(double factor = 1.0) const {
    std::vector<Term> out;
    for (std::size_t i = 0; i < tensors.size(); ++i) out.push_back({factor * coeffs[i], &tensors[i]});
    return out;
  }
};

// Exact sum_j c_j T_j of the given stage tensors, or nothing if all c_j vanish.
std::optional<HTensor> stage_combination(const std::vector<HTensor>& g, const Mat& table, int row, int upto) {
  std::vector<Term> terms;
  for (int j = 0; j < upto; ++j)
    if (table(row, j) != 0.0) terms.push_back({table(row, j), &g[j]});
  if (terms.empty()) return std::nullopt;
  return orthogonal_sum(terms);
}

}  // namespace

HTensor build_tensor(const DimensionTree& tree, const std::vector<SampledTerm>& terms, double rel_tol,
                     Index max_rank) {
  if (terms.empty()) return HTensor::zero(tree);
  std::vector<HTensor> parts;
  parts.reserve(terms.size());
  for (const auto& t : terms) parts.push_back(separable(tree, SpatialField{Mat(t.coeff * t.space)}, t.theta, t.mu));
  std::vector<Term> list;
  for (const auto& p : parts) list.push_back({1.0, &p});
  return truncated_sum(list, rel_tol, max_rank);
}

HTensor remove_angular_mean(const HTensor& g, const AngularQuadrature& q) {
  const auto& tree = g.tree();
  const int t = tree.node_with_dims({2, 3});
  const int l = tree.node(t).left, r = tree.node(t).right;
  if (tree.node(l).dims != std::vector<int>{2} || tree.node(r).dims != std::vector<int>{3})
    throw std::invalid_argument("unexpected angular subtree");
  const Mat& ul = g.frame(l);
  const Mat& ur = g.frame(r);
  const Mat& b = g.frame(t);
  const Index rl = ul.cols(), rr = ur.cols(), rt = b.cols();
  const Vec ml = ul.transpose() * q.theta_weights();
  const Vec mr = ur.transpose() * q.mu_weights();
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  Mat nb = Mat::Zero((rl + 1) * (rr + 1), rt);
  for (Index c = 0; c < rt; ++c) {
    double m = 0.0;
    for (Index bb = 0; bb < rr; ++bb)
      for (Index a = 0; a < rl; ++a) {
        nb(a + (rl + 1) * bb, c) = b(a + rl * bb, c);
        m += b(a + rl * bb, c) * ml(a) * mr(bb);
      }
    nb(rl + (rl + 1) * rr, c) = -m * inv4pi;
  }
  auto frames = g.frames();
  frames[l].conservativeResize(Eigen::NoChange, rl + 1);
  frames[l].col(rl).setOnes();
  frames[r].conservativeResize(Eigen::NoChange, rr + 1);
  frames[r].col(rr).setOnes();
  frames[t] = nb;
  return HTensor(tree, std::move(frames));
}

namespace {

// g with every column of one angular leaf made mean-free in that leaf's own
// weights: zero density at unchanged ranks.
HTensor center_leaf(const HTensor& g, int leaf, const Vec& w) {
  auto frames = g.frames();
  const Vec m = frames[leaf].transpose() * w / w.sum();
  frames[leaf].rowwise() -= m.transpose();
  return HTensor(g.tree(), std::move(frames));
}

}  // namespace

double zero_density_ratio(const HTensor& g, const AngularQuadrature& q) {
  const double n = norm(g);
  if (n == 0.0) return 0.0;
  return contract_angular(g, q.theta_weights(), q.mu_weights()).dense().norm() / n;
}

HTensor zero_density_projection(const HTensor& g, const AngularQuadrature& q, double rel_tol, Index max_rank,
                                bool* cap_reached) {
  const auto rho_g = contract_angular(g, q.theta_weights(), q.mu_weights());
  const HTensor null_part = separable(g.tree(), rho_g, Vec::Ones(q.n_theta()), Vec::Ones(q.n_mu()));
  const Term terms[] = {{1.0, &g}, {-1.0, &null_part}};
  TruncationReport rep;
  HTensor out = truncated_sum(terms, rel_tol, max_rank, &rep);
  if (cap_reached) *cap_reached = *cap_reached || rep.cap_reached;
  if (zero_density_ratio(out, q) <= 1e-13) return out;
  // The truncation leaks a little density back in. If one of the angular
  // leaves can absorb the fix within the truncation tolerance, keep the
  // ranks; otherwise add the constant direction explicitly.
  const auto& tree = out.tree();
  const int th = tree.leaf_of(2), mu = tree.leaf_of(3);
  const double n = norm(out);
  const HTensor cands[] = {center_leaf(out, th, q.theta_weights()), center_leaf(out, mu, q.mu_weights())};
  const double change[] = {norm(add(out, scale(cands[0], -1.0))), norm(add(out, scale(cands[1], -1.0)))};
  const int k = change[0] <= change[1] ? 0 : 1;
  if (change[k] <= rel_tol * n && zero_density_ratio(cands[k], q) <= 1e-13) return cands[k];
  return remove_angular_mean(out, q);
}

Mat mass_projection(const Mat& rho, double m0, double cell_area, double area) {
  if (!(area > 0.0)) throw std::invalid_argument("domain volume must be positive");
  const double m = rho.sum() * cell_area;
  return (rho.array() + (m0 - m) / area).matrix();
}

HTensor apply_cross_section(const Mat& sigma, const HTensor& g, double rel_tol, Index max_rank) {
  if (is_uniform(sigma)) return scale(g, sigma(0, 0));
  const auto& tree = g.tree();
  if (tree.kind() == TreeKind::unsplit) return scale_leaf_rows(g, tree.leaf_of(0), flat(sigma));
  return truncate(multiply_spatial(g, sigma), rel_tol, max_rank);
}

TransportSolver::TransportSolver(const Discretization& d) : d_(d) {
  if (d_.has_fluctuation) fluct_ = build_tensor(d_.tree, d_.fluctuation, 1e-14);
  MacroMicroState s;
  store_rho(s, d_.rho0);
  m0_ = d_.mass(s.rho);
}

void TransportSolver::store_rho(MacroMicroState& s, const Mat& rho) const {
  if (d_.tree.kind() == TreeKind::split) {
    s.rho_ht = compress_spatial(rho, d_.cfg.rel_tol_rho, d_.cfg.max_rank);
    s.rho = SpatialField{*s.rho_ht}.dense();
  } else {
    s.rho_ht.reset();
    s.rho = rho;
  }
}

MacroMicroState TransportSolver::initial_state() const {
  MacroMicroState s;
  store_rho(s, d_.rho0);
  s.g = build_tensor(d_.tree, d_.g0, d_.cfg.rel_tol_g, d_.cfg.max_rank);
  return s;
}

std::array<Mat, 4> TransportSolver::density_gradients(const Mat& rho) const {
  return density_derivatives(d_, rho);
}

GFlux TransportSolver::g_flux(const StageData& sd, int stage) const {
  GFlux f;
  auto ge = stage_combination(sd.g, d_.tableau.a_exp, stage, stage);
  if (!ge) return f;
  f.empty = false;
  f.ge = std::move(*ge);
  const auto& q = d_.quad;
  const int th = d_.theta_leaf(), mu = d_.mu_leaf();
  std::array<HTensor, 4> moved;
  // Smoothness measures summed over every line of the leaf matricization and
  // normalized by ||G_e||^2; for a rank-1 tensor these are exactly the
  // measures of its unit leaf column.
  if (d_.tree.kind() == TreeKind::unsplit) {
    const int xy = d_.x_leaf();
    const Mat v = leaf_gram_factor(f.ge, xy);
    const double sc = ensemble_scale(v);
    const FieldDerivative ops[] = {FieldDerivative::ensemble(d_.dxm, Axis::x, v, d_.nx(), d_.ny(), sc),
                                   FieldDerivative::ensemble(d_.dxp, Axis::x, v, d_.nx(), d_.ny(), sc),
                                   FieldDerivative::ensemble(d_.dym, Axis::y, v, d_.nx(), d_.ny(), sc),
                                   FieldDerivative::ensemble(d_.dyp, Axis::y, v, d_.nx(), d_.ny(), sc)};
    for (int k = 0; k < 4; ++k)
      moved[k] = apply_leaf_operator(f.ge, xy, LeafMap([&ops, k](const Mat& u) { return ops[k].apply_flat(u); }));
  } else {
    const int xl = d_.x_leaf(), yl = d_.y_leaf();
    const Mat vx = leaf_gram_factor(f.ge, xl), vy = leaf_gram_factor(f.ge, yl);
    const double sx = ensemble_scale(vx), sy = ensemble_scale(vy);
    const FrozenStencil ops[] = {d_.dxm.freeze_ensemble(vx, 0, 1, sx), d_.dxp.freeze_ensemble(vx, 0, 1, sx),
                                 d_.dym.freeze_ensemble(vy, 0, 1, sy), d_.dyp.freeze_ensemble(vy, 0, 1, sy)};
    for (int k = 0; k < 4; ++k)
      moved[k] = apply_leaf_operator(f.ge, k < 2 ? xl : yl,
                                     LeafMap([&ops, k](const Mat& u) { return ops[k].apply_columns(u); }));
  }
  // upwind pairing: xi+ with D-, xi- with D+
  const Vec* angular[] = {&q.cos_plus(), &q.cos_minus(), &q.sin_plus(), &q.sin_minus()};
  f.moment_flux = Mat::Zero(d_.nx(), d_.ny());
  for (int k = 0; k < 4; ++k) {
    f.pieces[k] = scale_leaf_rows(scale_leaf_rows(moved[k], th, *angular[k]), mu, q.polar_sine());
    f.moment_flux += contract_angular(f.pieces[k], q.theta_weights(), q.mu_weights()).dense();
  }
  return f;
}

Mat TransportSolver::rho_stage(const MacroMicroState& s, const StageData& sd, int stage, const GFlux& f) const {
  const auto& p = d_.tableau;
  const double dt = d_.dt;
  Mat rho = s.rho;
  if (!f.empty) rho -= dt * f.moment_flux;
  for (int j = 0; j < stage; ++j) {
    const double c = p.a_exp(stage, j);
    if (c == 0.0) continue;
    if (d_.absorbing) rho -= dt * c * d_.sigma_a.cwiseProduct(sd.rho[j]);
    if (d_.has_source) rho += dt * c * d_.source_time(s.t + p.c_exp(j) * dt) * d_.qbar;
  }
  return rho;
}

HTensor TransportSolver::g_stage(const MacroMicroState& s, const StageData& sd, int stage, const GFlux& f,
                                 bool* cap_reached) const {
  const auto& p = d_.tableau;
  const auto& q = d_.quad;
  const auto& cfg = d_.cfg;
  const double dt = d_.dt, eps = cfg.eps, e2 = eps * eps;
  const bool unsplit = d_.tree.kind() == TreeKind::unsplit;
  const Mat& rf = d_.stiff_factor[stage];
  const bool rf_uniform = d_.stiff_factor_uniform[stage];
  const int xy = d_.x_leaf();
  const Vec ones_t = Vec::Ones(q.n_theta()), ones_m = Vec::Ones(q.n_mu());

  // For the unsplit tree every term is multiplied by the stiff factor up
  // front; for the split tree the factor is applied to the sum.
  auto spatial = [&](const HTensor& h, const Mat* field) -> HTensor {
    if (unsplit) {
      Vec v = flat(rf);
      if (field) v = v.cwiseProduct(flat(*field));
      return scale_leaf_rows(h, xy, v);
    }
    if (!field) return h;
    return is_uniform(*field) ? scale(h, (*field)(0, 0)) : multiply_spatial(h, *field);
  };
  auto with_rf = [&](const Mat& m) -> Mat { return unsplit ? Mat(m.cwiseProduct(rf)) : m; };

  TermList terms;
  terms.push(1.0, spatial(s.g, nullptr));
  if (!f.empty) {
    for (const auto& piece : f.pieces) terms.push(-dt / eps, spatial(piece, nullptr));
    terms.push(dt / eps, separable(d_.tree, SpatialField{with_rf(f.moment_flux)}, ones_t, ones_m));
    if (d_.absorbing) terms.push(-dt, spatial(f.ge, &d_.sigma_a));
  }
  // alternating fluxes: xi- with D-, xi+ with D+
  std::array<Mat, 4> pk;
  pk.fill(Mat::Zero(d_.nx(), d_.ny()));
  bool any_rho = false;
  for (int j = 0; j <= stage; ++j) {
    const double c = p.a_imp(stage, j);
    if (c == 0.0) continue;
    any_rho = true;
    for (int k = 0; k < 4; ++k) pk[k] += c * sd.drho[j][k];
  }
  if (any_rho) {
    const Vec* angular[] = {&q.cos_minus(), &q.cos_plus(), &q.sin_minus(), &q.sin_plus()};
    for (int k = 0; k < 4; ++k)
      if (pk[k].cwiseAbs().maxCoeff() > 0.0)
        terms.push(-dt / e2, separable(d_.tree, SpatialField{with_rf(pk[k])}, *angular[k], q.polar_sine()));
  }
  if (auto gi = stage_combination(sd.g, p.a_imp, stage, stage)) terms.push(-dt / e2, spatial(*gi, &d_.sigma_s));
  if (d_.has_fluctuation) {
    double c = 0.0;
    // explicit weights, like the macro source
    for (int j = 0; j < stage; ++j) c += p.a_exp(stage, j) * d_.source_time(s.t + p.c_exp(j) * dt);
    if (c != 0.0) terms.push(dt / eps * c, spatial(fluct_, nullptr));
  }

  TruncationReport rep;
  HTensor out;
  if (unsplit) {
    out = truncated_sum(terms.terms(), cfg.rel_tol_g, cfg.max_rank, &rep);
  } else if (rf_uniform) {
    out = truncated_sum(terms.terms(rf(0, 0)), cfg.rel_tol_g, cfg.max_rank, &rep);
  } else {
    out = truncate(multiply_spatial(orthogonal_sum(terms.terms()), rf), cfg.rel_tol_g, cfg.max_rank, &rep);
  }
  if (cap_reached) *cap_reached = *cap_reached || rep.cap_reached;
  return out;
}

StepReport TransportSolver::step(MacroMicroState& s) const {
  const auto& p = d_.tableau;
  const auto& cfg = d_.cfg;
  StepReport report;
  StageData sd;
  MacroMicroState work;  // holds the stored form of each stage density
  for (int i = 0; i < p.stages; ++i) {
    const GFlux f = g_flux(sd, i);
    store_rho(work, rho_stage(s, sd, i, f));
    sd.rho.push_back(work.rho);
    sd.drho.push_back(density_gradients(work.rho));
    const bool trivial = p.a_exp.row(i).isZero(0.0) && p.a_imp.row(i).isZero(0.0);
    sd.g.push_back(trivial ? s.g : g_stage(s, sd, i, f, &report.cap_reached));
  }
  s.rho = std::move(work.rho);
  s.rho_ht = std::move(work.rho_ht);
  s.g = std::move(sd.g.back());
  if (cfg.zero_density_projection)
    s.g = zero_density_projection(s.g, d_.quad, cfg.rel_tol_g, cfg.max_rank, &report.cap_reached);
  if (cfg.mass_projection) {
    const double shift = (m0_ - d_.mass(s.rho)) / cfg.area();
    if (s.rho_ht) {
      // exact constant shift of the stored low-rank density (rank + 1)
      const HTensor ones = compress_spatial(Mat::Ones(d_.nx(), d_.ny()), 0.0);
      s.rho_ht = add(*s.rho_ht, scale(ones, shift));
      s.rho = SpatialField{*s.rho_ht}.dense();
    } else {
      s.rho = mass_projection(s.rho, m0_, d_.cell_area(), cfg.area());
    }
  }
  report.zero_density = zero_density_ratio(s.g, d_.quad);
  s.t += d_.dt;
  s.step += 1;
  return report;
}

DiagnosticsRow TransportSolver::diagnostics(const MacroMicroState& s) const {
  DiagnosticsRow r;
  r.step = s.step;
  r.t = s.t;
  r.ranks = s.g.ranks();
  r.ndofs_g = ndofs(s.g);
  if (s.rho_ht) {
    r.rho_ranks = s.rho_ht->ranks();
    r.ndofs_rho = ndofs(*s.rho_ht);
  } else {
    r.ndofs_rho = d_.n_xy();
  }
  r.compression = static_cast<double>(r.ndofs_g + r.ndofs_rho) / static_cast<double>(d_.full_dofs());
  r.mass_rho = d_.mass(s.rho);
  const Mat gm = contract_angular(s.g, d_.quad.theta_weights(), d_.quad.mu_weights()).dense();
  r.mass_eps_g = std::abs(d_.cfg.eps * gm.sum() * d_.cell_area());
  r.zero_density = zero_density_ratio(s.g, d_.quad);
  return r;
}

}  // namespace lrt
