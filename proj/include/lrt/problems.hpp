#pragma once

#include "lrt/stencil.hpp"
#include "lrt/tensor_tree.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace lrt {

enum class ProblemKind { manufactured, variable_scattering, lattice, gaussian_diffusion };
// manufactured: 0.1 eps dx + 0.1 dx^2; variable scattering: 0.1 eps dx; lattice: 0.1 dx
enum class DtRule { manufactured, variable_scattering, lattice };

std::string to_string(ProblemKind k);
std::string to_string(DtRule r);
std::string to_string(TreeKind k);
std::string to_string(Scheme s);

// Scalar knobs of a run. Everything here can be overridden from a config
// file; the evaluators in ProblemData are rebuilt from it.
struct ProblemConfig {
  ProblemKind kind = ProblemKind::manufactured;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 16, ny = 16;
  int order = 8;  // S_N
  double eps = 1.0;
  double t_final = 0.1;
  int steps = 0;  // > 0 runs a fixed number of rule steps instead of t_final
  DtRule dt_rule = DtRule::manufactured;
  double zeta = 0.1;
  TreeKind tree = TreeKind::unsplit;
  Scheme scheme = Scheme::weno5;
  std::string tableau = "ars443";  // built-in name or a tableau file path
  double rel_tol_g = 1e-4;
  double rel_tol_rho = 1e-16;
  Index max_rank = kDefaultMaxRank;
  bool mass_projection = false;
  bool zero_density_projection = true;
  // gaussian_diffusion only: start from the leading-order Chapman-Enskog g
  bool well_prepared = true;
  // lattice only
  double absorber_sigma_a = 10.0, background_sigma_s = 1.0, source_strength = 1.0;
  // variable scattering variant with absorption/source switched off is the
  // default; these allow adding them uniformly
  double uniform_sigma_a = 0.0;

  double dx() const { return (x1 - x0) / nx; }
  double dy() const { return (y1 - y0) / ny; }
  double x(int i) const { return x0 + i * dx(); }
  double y(int j) const { return y0 + j * dy(); }
  double area() const { return (x1 - x0) * (y1 - y0); }
  double rule_dt() const;
  int n_steps() const;
  double dt() const;  // t_final / n_steps, or rule_dt() when steps > 0
  double end_time() const { return n_steps() * dt(); }
  void validate() const;
};

ProblemConfig manufactured(double eps, int n, int order = 8);
ProblemConfig variable_scattering(int n, int order = 64);
ProblemConfig lattice(int n, int order = 64);
// Isotropic Gaussian in a uniform scatterer on [-1,1]^2; for small eps the
// density follows rho_t = div(grad rho / (3 sigma_s)).
ProblemConfig gaussian_diffusion(double eps, int n, int order = 4);
ProblemConfig default_problem(ProblemKind kind);

using Field2 = std::function<double(double, double)>;
using Profile = std::function<double(double)>;

// coeff * space(x, y) * theta_part(theta) * mu_part(mu)
struct SeparableTerm {
  double coeff = 1.0;
  Field2 space;
  Profile theta;
  Profile mu;
};

struct ProblemData {
  Field2 sigma_s, sigma_a;
  Field2 rho0;
  std::vector<SeparableTerm> g0;          // empty: g0 = 0
  Profile source_time;                    // multiplies every source term
  std::vector<SeparableTerm> source;      // Q(x, Omega, t) = source_time(t) sum terms
  std::function<double(double, double, double)> exact_rho;  // (x, y, t); may be empty
  std::function<double(double, double, double, double, double)> exact_g;  // (x,y,th,mu,t)
};

ProblemData problem_data(const ProblemConfig& cfg);

double evaluate_source(const ProblemData& d, double x, double y, double theta, double mu, double t);
double evaluate_terms(const std::vector<SeparableTerm>& terms, double x, double y, double theta,
                      double mu);

// nx x ny samples at the grid nodes x_i = x0 + i dx, x fastest
Eigen::MatrixXd sample(const Field2& f, const ProblemConfig& cfg);

// dx dy sum |rho - rho_exact(t)|
double analytic_error(const Eigen::MatrixXd& rho, const ProblemConfig& cfg, const ProblemData& d,
                      double t);

// Lattice layout: absorber cells [1+k,2+k] x [1+l,2+l], k,l in 0..4, k+l even,
// except the central source cell (2,2) and (2,4).
bool lattice_absorber(double x, double y);
bool lattice_source(double x, double y);

}  // namespace lrt
