#pragma once

#include "lrt/config.hpp"
#include "lrt/tensor_tree.hpp"
#include "lrt/transport_solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lrt {

// Dense array file, little-endian throughout:
//   magic "LRTARR01" (8 bytes), u64 version (1), u64 rank, u64 shape[rank],
//   f64 payload in row-major order (last axis fastest).
// A density field has shape (nx, ny) with axes (x, y); a g field would be
// (nx, ny, n_theta, n_mu).
struct ArrayFile {
  std::vector<std::uint64_t> shape;
  std::vector<double> data;  // row-major
};

inline constexpr char kArrayMagic[8] = {'L', 'R', 'T', 'A', 'R', 'R', '0', '1'};
inline constexpr std::uint64_t kArrayVersion = 1;

void write_array(std::ostream& out, const ArrayFile& a);
ArrayFile read_array(std::istream& in);
void write_density(const std::string& path, const Eigen::MatrixXd& rho);
// nx x ny matrix back from a (nx, ny) array
Eigen::MatrixXd read_density(const std::string& path);

// Index of the grid line nearest to coordinate v on the periodic node grid
// lo + i h, i < n.
int nearest_line(double v, double lo, double h, int n);

struct SliceLines {
  int i_mid = 0;  // x = x(i_mid), the line along y
  int j_line = 0; // y = y(j_line), the line along x
  double x_mid = 0.0, y_line = 0.0;
};
SliceLines slice_lines(const ProblemConfig& cfg, double requested_y);

// line,index,x,y,rho,rho_floor where rho_floor = max(rho, 1e-40) for log plots
inline constexpr double kSliceFloor = 1e-40;
void write_slices(std::ostream& out, const Eigen::MatrixXd& rho, const ProblemConfig& cfg,
                  const SliceLines& lines);

// step,t,ranks,rho_ranks,ndofs_g,ndofs_rho,compression,mass_rho,mass_eps_g,
// zero_density,cap_reached. Rank lists are ';'-separated, breadth-first.
void write_diag_header(std::ostream& out);
void write_diag_row(std::ostream& out, const DiagnosticsRow& r);

// node,label,index,sigma,relative (relative = sigma / sigma_1); labels use
// spaces between dimensions, e.g. "{x y}"
void write_spectra(std::ostream& out, const std::vector<NodeSpectrum>& spectra);

// Minimal CSV reader for the files above (no quoting is ever written).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace lrt
