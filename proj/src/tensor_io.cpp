#include "lrt/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lrt {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'T', 'H', 'T', 'E', 'N', '1'};
constexpr std::uint64_t kVersion = 1;
constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void write_u64(std::ostream& out, std::uint64_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated binary input");
  return to_le(v);
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void save_htensor(const HTensor& ht, std::ostream& out) {
  const auto& tree = ht.tree();
  out.write(kMagic, sizeof kMagic);
  write_u64(out, kVersion);
  write_u64(out, static_cast<std::uint64_t>(tree.kind()));
  write_u64(out, tree.order());
  for (Index n : tree.mode_sizes()) write_u64(out, n);
  write_u64(out, tree.size());
  for (int t = 0; t < tree.size(); ++t) {
    const auto& nd = tree.node(t);
    write_u64(out, nd.is_leaf() ? kNone : nd.left);
    write_u64(out, nd.is_leaf() ? kNone : nd.right);
    write_u64(out, nd.dims.size());
    for (int d : nd.dims) write_u64(out, d);
    write_u64(out, ht.frame(t).rows());
    write_u64(out, ht.frame(t).cols());
  }
  for (const auto& f : ht.frames())
    for (Index i = 0; i < f.size(); ++i) write_f64(out, f.data()[i]);
  if (!out) throw std::runtime_error("failed to write tensor");
}

HTensor load_htensor(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not an HTensor file");
  if (read_u64(in) != kVersion) throw std::runtime_error("unsupported HTensor file version");
  const auto kind = static_cast<TreeKind>(read_u64(in));
  const auto d = read_u64(in);
  if (d < 1 || d > 16) throw std::runtime_error("bad tensor order");
  std::vector<Index> modes(d);
  for (auto& m : modes) m = static_cast<Index>(read_u64(in));
  const auto count = read_u64(in);
  if (count < 1 || count > 64) throw std::runtime_error("bad node count");
  std::vector<TreeNode> nodes(count);
  std::vector<std::pair<Index, Index>> shapes(count);
  for (std::size_t t = 0; t < count; ++t) {
    auto& nd = nodes[t];
    const auto l = read_u64(in), r = read_u64(in);
    nd.left = l == kNone ? -1 : static_cast<int>(l);
    nd.right = r == kNone ? -1 : static_cast<int>(r);
    const auto nd_dims = read_u64(in);
    if (nd_dims > d) throw std::runtime_error("bad node dims");
    for (std::uint64_t q = 0; q < nd_dims; ++q) nd.dims.push_back(static_cast<int>(read_u64(in)));
    shapes[t] = {static_cast<Index>(read_u64(in)), static_cast<Index>(read_u64(in))};
    if (shapes[t].first * shapes[t].second > (Index{1} << 31)) throw std::runtime_error("frame too large");
  }
  for (std::size_t t = 0; t < count; ++t)
    if (!nodes[t].is_leaf()) {
      if (nodes[t].left >= static_cast<int>(count) || nodes[t].right >= static_cast<int>(count))
        throw std::runtime_error("bad child index");
      nodes[nodes[t].left].parent = static_cast<int>(t);
      nodes[nodes[t].right].parent = static_cast<int>(t);
    }
  auto tree = DimensionTree::from_nodes(kind, std::move(modes), std::move(nodes));
  std::vector<Eigen::MatrixXd> frames(count);
  for (std::size_t t = 0; t < count; ++t) {
    frames[t].resize(shapes[t].first, shapes[t].second);
    for (Index i = 0; i < frames[t].size(); ++i) frames[t].data()[i] = read_f64(in);
  }
  return HTensor(std::move(tree), std::move(frames));
}

void save_htensor(const HTensor& ht, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  save_htensor(ht, out);
}

HTensor load_htensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_htensor(in);
}

}  // namespace lrt
