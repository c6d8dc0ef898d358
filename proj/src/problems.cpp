#include "lrt/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrt {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::manufactured: return "manufactured";
    case ProblemKind::variable_scattering: return "variable_scattering";
    case ProblemKind::lattice: return "lattice";
    case ProblemKind::gaussian_diffusion: return "gaussian_diffusion";
  }
  return "?";
}

std::string to_string(DtRule r) {
  switch (r) {
    case DtRule::manufactured: return "manufactured";
    case DtRule::variable_scattering: return "variable_scattering";
    case DtRule::lattice: return "lattice";
  }
  return "?";
}

std::string to_string(TreeKind k) {
  switch (k) {
    case TreeKind::unsplit: return "unsplit";
    case TreeKind::split: return "split";
    case TreeKind::spatial: return "spatial";
  }
  return "?";
}

std::string to_string(Scheme s) { return s == Scheme::weno5 ? "weno5" : "muscl2"; }

double ProblemConfig::rule_dt() const {
  const double h = std::min(dx(), dy());
  switch (dt_rule) {
    case DtRule::manufactured: return 0.1 * eps * h + 0.1 * h * h;
    case DtRule::variable_scattering: return 0.1 * eps * h;
    case DtRule::lattice: return 0.1 * h;
  }
  return 0.0;
}

int ProblemConfig::n_steps() const {
  if (steps > 0) return steps;
  // guard against T/dt landing a hair above an integer
  return std::max(1, static_cast<int>(std::ceil(t_final / rule_dt() * (1.0 - 1e-12))));
}

double ProblemConfig::dt() const { return steps > 0 ? rule_dt() : t_final / n_steps(); }

void ProblemConfig::validate() const {
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("empty domain");
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid sizes must be positive");
  if (order < 1) throw std::invalid_argument("quadrature order must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  if (steps == 0 && !(t_final > 0.0)) throw std::invalid_argument("final time must be positive");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  if (tree == TreeKind::spatial) throw std::invalid_argument("tree must be unsplit or split");
  if (rel_tol_g < 0.0 || rel_tol_rho < 0.0) throw std::invalid_argument("tolerances must be nonnegative");
  if (max_rank < 1) throw std::invalid_argument("max_rank must be at least 1");
  if (!(background_sigma_s > 0.0)) throw std::invalid_argument("sigma_s must be positive");
  if (absorber_sigma_a < 0.0 || uniform_sigma_a < 0.0) throw std::invalid_argument("sigma_a must be nonnegative");
}

ProblemConfig manufactured(double eps, int n, int order) {
  ProblemConfig c;
  c.kind = ProblemKind::manufactured;
  c.eps = eps;
  c.nx = c.ny = n;
  c.order = order;
  c.t_final = 0.1;
  c.dt_rule = DtRule::manufactured;
  return c;
}

ProblemConfig variable_scattering(int n, int order) {
  ProblemConfig c;
  c.kind = ProblemKind::variable_scattering;
  c.x0 = c.y0 = -1.0;
  c.x1 = c.y1 = 1.0;
  c.nx = c.ny = n;
  c.order = order;
  c.eps = 1e-2;
  c.t_final = 0.01;
  c.dt_rule = DtRule::variable_scattering;
  c.zeta = 0.1;
  return c;
}

ProblemConfig lattice(int n, int order) {
  ProblemConfig c;
  c.kind = ProblemKind::lattice;
  c.x0 = c.y0 = 0.0;
  c.x1 = c.y1 = 7.0;
  c.nx = c.ny = n;
  c.order = order;
  c.eps = 1.0;
  c.t_final = 2.0;
  c.dt_rule = DtRule::lattice;
  c.zeta = 0.1;
  return c;
}

ProblemConfig gaussian_diffusion(double eps, int n, int order) {
  ProblemConfig c;
  c.kind = ProblemKind::gaussian_diffusion;
  c.x0 = c.y0 = -1.0;
  c.x1 = c.y1 = 1.0;
  c.nx = c.ny = n;
  c.order = order;
  c.eps = eps;
  c.t_final = 0.01;
  c.dt_rule = DtRule::manufactured;
  c.zeta = 0.2;
  return c;
}

ProblemConfig default_problem(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::manufactured: return manufactured(1.0, 16);
    case ProblemKind::variable_scattering: return variable_scattering(32);
    case ProblemKind::lattice: return lattice(32);
    case ProblemKind::gaussian_diffusion: return gaussian_diffusion(1e-8, 32);
  }
  throw std::invalid_argument("unknown problem");
}

bool lattice_absorber(double x, double y) {
  const int k = static_cast<int>(std::floor(x)) - 1;
  const int l = static_cast<int>(std::floor(y)) - 1;
  if (k < 0 || k > 4 || l < 0 || l > 4) return false;
  if ((k + l) % 2 != 0) return false;
  if (k == 2 && (l == 2 || l == 4)) return false;
  return true;
}

bool lattice_source(double x, double y) { return x >= 3.0 && x < 4.0 && y >= 3.0 && y < 4.0; }

namespace {

Profile one() {
  return [](double) { return 1.0; };
}

// Q for the manufactured solution rho = 2 + e^-t S, g = e^-t S sin(th) s(mu)
// with S = sin(2 pi x) sin(2 pi y), s = sqrt(1 - mu^2), sigma_s = 1.
void manufactured_data(const ProblemConfig& c, ProblemData& d) {
  const double eps = c.eps;
  auto S = [](double x, double y) { return std::sin(2 * kPi * x) * std::sin(2 * kPi * y); };
  auto Sx = [](double x, double y) { return 2 * kPi * std::cos(2 * kPi * x) * std::sin(2 * kPi * y); };
  auto Sy = [](double x, double y) { return 2 * kPi * std::sin(2 * kPi * x) * std::cos(2 * kPi * y); };
  Profile s = [](double mu) { return std::sqrt(std::max(0.0, 1.0 - mu * mu)); };
  Profile s2 = [](double mu) { return 1.0 - mu * mu; };
  Profile sn = [](double th) { return std::sin(th); };
  Profile cs = [](double th) { return std::cos(th); };
  d.sigma_s = [](double, double) { return 1.0; };
  d.sigma_a = [](double, double) { return 0.0; };
  d.rho0 = [S](double x, double y) { return 2.0 + S(x, y); };
  d.g0 = {{1.0, S, sn, s}};
  d.source_time = [](double t) { return std::exp(-t); };
  d.source = {
      {-1.0, S, one(), one()},
      {1.0 / eps - eps, S, sn, s},
      {1.0 / eps, Sx, cs, s},
      {1.0 / eps, Sy, sn, s},
      {1.0, Sx, [](double th) { return std::cos(th) * std::sin(th); }, s2},
      {1.0, Sy, [](double th) { return std::sin(th) * std::sin(th); }, s2},
  };
  d.exact_rho = [S](double x, double y, double t) { return 2.0 + std::exp(-t) * S(x, y); };
  d.exact_g = [S](double x, double y, double th, double mu, double t) {
    return std::exp(-t) * S(x, y) * std::sin(th) * std::sqrt(std::max(0.0, 1.0 - mu * mu));
  };
}

Field2 gaussian(double xc, double yc, double zeta) {
  return [=](double x, double y) {
    const double r2 = (x - xc) * (x - xc) + (y - yc) * (y - yc);
    return std::exp(-r2 / (4 * zeta * zeta)) / (4 * kPi * zeta * zeta);
  };
}

}  // namespace

ProblemData problem_data(const ProblemConfig& c) {
  c.validate();
  ProblemData d;
  d.source_time = [](double) { return 1.0; };
  switch (c.kind) {
    case ProblemKind::manufactured:
      manufactured_data(c, d);
      break;
    case ProblemKind::variable_scattering: {
      d.sigma_s = [](double x, double y) {
        const double r = std::sqrt(x * x + y * y);
        if (r >= 1.0) return 1.0;
        const double q = r * r - 2.0;  // (c + sqrt2)(c - sqrt2)
        return 0.999 * std::pow(r, 4) * q * q + 0.001;
      };
      const double sa = c.uniform_sigma_a;
      d.sigma_a = [sa](double, double) { return sa; };
      d.rho0 = gaussian(0.0, 0.0, c.zeta);
      break;
    }
    case ProblemKind::lattice: {
      const double sa = c.absorber_sigma_a, ss = c.background_sigma_s, q = c.source_strength;
      d.sigma_s = [ss](double, double) { return ss; };
      d.sigma_a = [sa](double x, double y) { return lattice_absorber(x, y) ? sa : 0.0; };
      d.rho0 = gaussian(3.5, 3.5, c.zeta);
      d.source = {{q, [](double x, double y) { return lattice_source(x, y) ? 1.0 : 0.0; }, one(), one()}};
      break;
    }
    case ProblemKind::gaussian_diffusion: {
      d.sigma_s = [](double, double) { return 1.0; };
      const double sa = c.uniform_sigma_a;
      d.sigma_a = [sa](double, double) { return sa; };
      d.rho0 = gaussian(0.0, 0.0, c.zeta);
      if (c.well_prepared) {
        // g0 = -(1/sigma_s) Omega . grad rho0
        const double z2 = c.zeta * c.zeta;
        auto r0 = d.rho0;
        Field2 gx = [r0, z2](double x, double y) { return -x / (2 * z2) * r0(x, y); };
        Field2 gy = [r0, z2](double x, double y) { return -y / (2 * z2) * r0(x, y); };
        Profile s = [](double mu) { return std::sqrt(std::max(0.0, 1.0 - mu * mu)); };
        d.g0 = {{-1.0, gx, [](double th) { return std::cos(th); }, s},
                {-1.0, gy, [](double th) { return std::sin(th); }, s}};
      }
      break;
    }
  }
  return d;
}

double evaluate_terms(const std::vector<SeparableTerm>& terms, double x, double y, double theta,
                      double mu) {
  double v = 0.0;
  for (const auto& t : terms) v += t.coeff * t.space(x, y) * t.theta(theta) * t.mu(mu);
  return v;
}

double evaluate_source(const ProblemData& d, double x, double y, double theta, double mu, double t) {
  if (d.source.empty()) return 0.0;
  return d.source_time(t) * evaluate_terms(d.source, x, y, theta, mu);
}

Eigen::MatrixXd sample(const Field2& f, const ProblemConfig& c) {
  Eigen::MatrixXd m(c.nx, c.ny);
  for (int j = 0; j < c.ny; ++j)
    for (int i = 0; i < c.nx; ++i) m(i, j) = f(c.x(i), c.y(j));
  return m;
}

double analytic_error(const Eigen::MatrixXd& rho, const ProblemConfig& c, const ProblemData& d, double t) {
  if (!d.exact_rho) throw std::invalid_argument("problem has no analytic density");
  if (rho.rows() != c.nx || rho.cols() != c.ny) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (int j = 0; j < c.ny; ++j)
    for (int i = 0; i < c.nx; ++i) s += std::abs(rho(i, j) - d.exact_rho(c.x(i), c.y(j), t));
  return s * c.dx() * c.dy();
}

}  // namespace lrt
