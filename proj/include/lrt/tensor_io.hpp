#pragma once

#include "lrt/tensor_tree.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace lrt {

// Binary container, all integers little-endian u64, payload little-endian f64:
//   magic "LRTHTEN1" (8 bytes), version, tree kind, d, mode sizes[d], node count,
//   per node: left, right (UINT64_MAX for leaves), dim count, dims..., rows, cols,
//   then every frame column-major in node order.
void save_htensor(const HTensor& ht, std::ostream& out);
HTensor load_htensor(std::istream& in);
void save_htensor(const HTensor& ht, const std::string& path);
HTensor load_htensor(const std::string& path);

// Little-endian helpers shared by the other binary writers.
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

}  // namespace lrt
