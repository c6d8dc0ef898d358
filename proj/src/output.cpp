#include "lrt/output.hpp"

#include "lrt/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lrt {

namespace {

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_array(std::ostream& out, const ArrayFile& a) {
  std::uint64_t count = 1;
  for (auto n : a.shape) count *= n;
  if (count != a.data.size()) throw std::invalid_argument("array shape does not match its payload");
  out.write(kArrayMagic, sizeof kArrayMagic);
  write_u64(out, kArrayVersion);
  write_u64(out, a.shape.size());
  for (auto n : a.shape) write_u64(out, n);
  for (double v : a.data) write_f64(out, v);
  if (!out) throw std::runtime_error("array write failed");
}

ArrayFile read_array(std::istream& in) {
  char magic[sizeof kArrayMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kArrayMagic, sizeof magic) != 0) throw std::runtime_error("not an array file");
  if (read_u64(in) != kArrayVersion) throw std::runtime_error("unsupported array version");
  ArrayFile a;
  a.shape.resize(read_u64(in));
  std::uint64_t count = 1;
  for (auto& n : a.shape) count *= (n = read_u64(in));
  a.data.resize(count);
  for (auto& v : a.data) v = read_f64(in);
  if (!in) throw std::runtime_error("truncated array file");
  return a;
}

void write_density(const std::string& path, const Eigen::MatrixXd& rho) {
  ArrayFile a;
  a.shape = {static_cast<std::uint64_t>(rho.rows()), static_cast<std::uint64_t>(rho.cols())};
  a.data.reserve(rho.size());
  for (Index i = 0; i < rho.rows(); ++i)
    for (Index j = 0; j < rho.cols(); ++j) a.data.push_back(rho(i, j));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_array(out, a);
}

Eigen::MatrixXd read_density(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  const ArrayFile a = read_array(in);
  if (a.shape.size() != 2) throw std::runtime_error("density must be two-dimensional");
  Eigen::MatrixXd rho(a.shape[0], a.shape[1]);
  for (Index i = 0; i < rho.rows(); ++i)
    for (Index j = 0; j < rho.cols(); ++j) rho(i, j) = a.data[i * rho.cols() + j];
  return rho;
}

int nearest_line(double v, double lo, double h, int n) {
  const long k = std::lround((v - lo) / h);
  return static_cast<int>(((k % n) + n) % n);
}

SliceLines slice_lines(const ProblemConfig& cfg, double requested_y) {
  SliceLines s;
  s.i_mid = nearest_line(0.5 * (cfg.x0 + cfg.x1), cfg.x0, cfg.dx(), cfg.nx);
  s.j_line = nearest_line(requested_y, cfg.y0, cfg.dy(), cfg.ny);
  s.x_mid = cfg.x(s.i_mid);
  s.y_line = cfg.y(s.j_line);
  return s;
}

void write_slices(std::ostream& out, const Eigen::MatrixXd& rho, const ProblemConfig& cfg,
                  const SliceLines& lines) {
  out << "line,index,x,y,rho,rho_floor\n";
  auto row = [&](const char* line, int idx, int i, int j) {
    const double v = rho(i, j);
    out << line << ',' << idx << ',' << format_double(cfg.x(i)) << ',' << format_double(cfg.y(j)) << ','
        << format_double(v) << ',' << format_double(std::max(v, kSliceFloor)) << '\n';
  };
  for (int j = 0; j < cfg.ny; ++j) row("x_mid", j, lines.i_mid, j);
  for (int i = 0; i < cfg.nx; ++i) row("y_line", i, i, lines.j_line);
}

void write_diag_header(std::ostream& out) {
  out << "step,t,ranks,rho_ranks,ndofs_g,ndofs_rho,compression,mass_rho,mass_eps_g,zero_density,cap_reached\n";
}

void write_diag_row(std::ostream& out, const DiagnosticsRow& r) {
  out << r.step << ',' << format_double(r.t) << ',' << join(r.ranks) << ',' << join(r.rho_ranks) << ','
      << r.ndofs_g << ',' << r.ndofs_rho << ',' << format_double(r.compression) << ','
      << format_double(r.mass_rho) << ',' << format_double(r.mass_eps_g) << ','
      << format_double(r.zero_density) << ',' << (r.cap_reached ? 1 : 0) << '\n';
}

void write_spectra(std::ostream& out, const std::vector<NodeSpectrum>& spectra) {
  out << "node,label,index,sigma,relative\n";
  for (const auto& s : spectra) {
    std::string label = s.label;  // "{x,y}" -> "{x y}", no commas in cells
    std::replace(label.begin(), label.end(), ',', ' ');
    const double top = s.sigma.size() ? s.sigma(0) : 0.0;
    for (Index i = 0; i < s.sigma.size(); ++i)
      out << s.node << ',' << label << ',' << i + 1 << ',' << format_double(s.sigma(i)) << ','
          << format_double(top > 0.0 ? s.sigma(i) / top : 0.0) << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size())
      throw std::runtime_error("csv row with " + std::to_string(t.rows.back().size()) + " cells, header has " +
                               std::to_string(t.header.size()));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_csv(in);
}

}  // namespace lrt
