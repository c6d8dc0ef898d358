#include "lrt/tensor_tree.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

constexpr double kZeroNorm = 1e-300;

struct QR {
  Mat q;
  Mat r;
};

QR thin_qr(const Mat& a) {
  const Index m = a.rows(), n = a.cols(), k = std::min(m, n);
  Eigen::HouseholderQR<Mat> qr(a);
  QR out;
  out.q = qr.householderQ() * Mat::Identity(m, k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

// Thin SVD through LAPACK. Eigen's divide-and-conquer SVD can crash or
// return NaN on matrices whose trailing singular values cluster at round-off,
// which is the normal case here (e.g. an exactly low-rank density).
// OpenBLAS threads its kernels on its own; keep it to one thread so results
// do not depend on the machine. Weak, so any other LAPACK links as well.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

struct ThinSvd {
  Mat u, v;
  Vec s;
};

ThinSvd thin_svd(const Mat& m, bool want_v) {
  static const bool pinned = [] {
    if (openblas_set_num_threads) openblas_set_num_threads(1);
    return true;
  }();
  (void)pinned;
  const lapack_int rows = static_cast<lapack_int>(m.rows()), cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  ThinSvd out;
  out.s.resize(k);
  out.u.resize(rows, k);
  Mat vt(k, cols);
  if (k == 0) {
    if (want_v) out.v.resize(cols, 0);
    return out;
  }
  Mat a = m;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(),
                                   rows, vt.data(), k);
  if (info != 0) {
    // QR-iteration driver: slower, converges where the other one gives up
    a = m;
    std::vector<double> superb(std::max<lapack_int>(1, k - 1));
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows,
                          vt.data(), k, superb.data());
  }
  if (info != 0) throw std::runtime_error("SVD failed to converge");
  if (want_v) out.v = vt.transpose();
  return out;
}

// Left singular vectors and values of m. Wide inputs are first reduced by a
// QR of the transpose, which is cheaper and equally accurate.
void left_svd(const Mat& m, Mat& u, Vec& s) {
  if (m.cols() > 2 * m.rows()) {
    Eigen::HouseholderQR<Mat> qr(m.transpose());
    Mat r = qr.matrixQR().topRows(m.rows()).triangularView<Eigen::Upper>();
    auto svd = thin_svd(r.transpose(), false);
    u = std::move(svd.u);
    s = std::move(svd.s);
  } else {
    auto svd = thin_svd(m, false);
    u = std::move(svd.u);
    s = std::move(svd.s);
  }
}

// Frame with left child index fastest: f((a + rl*b), k). Multiply the left
// child index by m (rl' x rl).
Mat left_mult(const Mat& f, Index rl, Index rr, const Mat& m) {
  const Index rt = f.cols();
  Eigen::Map<const Mat> fl(f.data(), rl, rr * rt);
  Mat out(m.rows() * rr, rt);
  Eigen::Map<Mat> ol(out.data(), m.rows(), rr * rt);
  ol.noalias() = m * fl;
  return out;
}

// Multiply the right child index by m (rr' x rr).
Mat right_mult(const Mat& f, Index rl, Index rr, const Mat& m) {
  const Index rt = f.cols();
  const Index rr2 = m.rows();
  Mat out(rl * rr2, rt);
  for (Index k = 0; k < rt; ++k) {
    Eigen::Map<const Mat> fk(f.data() + k * f.rows(), rl, rr);
    Eigen::Map<Mat> ok(out.data() + k * out.rows(), rl, rr2);
    ok.noalias() = fk * m.transpose();
  }
  return out;
}

// Rows indexed by the right child: out(b, a + rl*k) = t(a + rl*b, k).
Mat right_matricization(const Mat& t, Index rl, Index rr) {
  const Index q = t.cols();
  Mat out(rr, rl * q);
  for (Index k = 0; k < q; ++k) {
    Eigen::Map<const Mat> tk(t.data() + k * t.rows(), rl, rr);
    out.middleCols(k * rl, rl) = tk.transpose();
  }
  return out;
}

// Smallest rank k >= 1 whose discarded tail has norm <= tol, capped.
Index choose_rank(const Vec& sigma, double tol, Index max_rank, bool& cap, double& dropped_sq) {
  const Index p = sigma.size();
  Index k = p;
  double tail = 0.0;
  while (k > 1) {
    const double next = tail + sigma(k - 1) * sigma(k - 1);
    if (std::sqrt(next) > tol) break;
    tail = next;
    --k;
  }
  if (k > max_rank) {
    cap = true;
    k = max_rank;
  }
  for (Index i = k; i < p; ++i) dropped_sq += sigma(i) * sigma(i);
  return std::max<Index>(k, 1);
}

void check_same_tree(const HTensor& a, const HTensor& b) {
  if (!(a.tree() == b.tree())) throw std::invalid_argument("HTensor tree mismatch");
}

struct TopDown {
  std::vector<Mat> u;  // left singular vectors per non-root node
  std::vector<Vec> sigma;
};

// Root-to-leaves pass on an orthogonalized tensor: singular values and left
// singular vectors of every node matricization, expressed in the node frame.
TopDown top_down_svd(const HTensor& o) {
  const auto& tree = o.tree();
  const int n = tree.size();
  TopDown td;
  td.u.resize(n);
  td.sigma.resize(n);
  std::vector<Mat> c(n);
  for (int t = 0; t < n; ++t) {
    const auto& node = tree.node(t);
    if (node.is_leaf()) continue;
    const int l = node.left, r = node.right;
    const Index rl = o.rank(l), rr = o.rank(r);
    if (t == 0) {
      Eigen::Map<const Mat> m(o.frame(0).data(), rl, rr);
      auto svd = thin_svd(m, true);
      td.u[l] = std::move(svd.u);
      td.u[r] = std::move(svd.v);
      td.sigma[l] = td.sigma[r] = svd.s;
    } else {
      const Mat tmat = o.frame(t) * c[t];
      Eigen::Map<const Mat> ml(tmat.data(), rl, rr * tmat.cols());
      left_svd(ml, td.u[l], td.sigma[l]);
      left_svd(right_matricization(tmat, rl, rr), td.u[r], td.sigma[r]);
    }
    c[l] = td.u[l] * td.sigma[l].asDiagonal();
    c[r] = td.u[r] * td.sigma[r].asDiagonal();
  }
  return td;
}

std::vector<NodeSpectrum> spectra_from(const DimensionTree& tree, const TopDown& td) {
  std::vector<NodeSpectrum> out;
  for (int t = 1; t < tree.size(); ++t) out.push_back({t, tree.label(t), td.sigma[t]});
  return out;
}

std::vector<NodeSpectrum> zero_spectra(const DimensionTree& tree) {
  std::vector<NodeSpectrum> out;
  for (int t = 1; t < tree.size(); ++t) out.push_back({t, tree.label(t), Vec::Zero(1)});
  return out;
}

HTensor truncate_orthogonal(const HTensor& o, double rel_tol, Index max_rank,
                            TruncationReport* report) {
  if (rel_tol < 0.0) throw std::invalid_argument("negative truncation tolerance");
  if (max_rank < 1) throw std::invalid_argument("max_rank must be >= 1");
  const auto& tree = o.tree();
  const double nrm = o.frame(0).norm();
  if (!(nrm >= kZeroNorm)) {
    if (!std::isfinite(nrm)) throw std::runtime_error("non-finite tensor in truncation");
    if (report) *report = {zero_spectra(tree), 0.0, false};
    return HTensor::zero(tree);
  }
  const TopDown td = top_down_svd(o);
  const double tol = rel_tol * nrm / std::sqrt(static_cast<double>(tree.non_root_count()));
  const int n = tree.size();
  std::vector<Mat> s(n);
  bool cap = false;
  double dropped = 0.0;
  for (int t = 1; t < n; ++t) {
    const Index k = choose_rank(td.sigma[t], tol, max_rank, cap, dropped);
    s[t] = td.u[t].leftCols(std::min<Index>(k, td.u[t].cols()));
  }
  std::vector<Mat> frames(n);
  for (int t = 0; t < n; ++t) {
    const auto& node = tree.node(t);
    if (node.is_leaf()) {
      frames[t] = o.frame(t) * s[t];
      continue;
    }
    const Index rl = o.rank(node.left), rr = o.rank(node.right);
    Mat f = left_mult(o.frame(t), rl, rr, s[node.left].transpose());
    f = right_mult(f, s[node.left].cols(), rr, s[node.right].transpose());
    frames[t] = t == 0 ? f : Mat(f * s[t]);
  }
  if (report) *report = {spectra_from(tree, td), std::sqrt(dropped), cap};
  return orthogonalize(HTensor(tree, std::move(frames)));
}

Mat khatri_rao(const Mat& a, const Mat& b) {
  Mat k(a.rows(), a.cols() * b.cols());
  for (Index j = 0; j < b.cols(); ++j)
    for (Index i = 0; i < a.cols(); ++i) k.col(i + a.cols() * j) = a.col(i).cwiseProduct(b.col(j));
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// DimensionTree

DimensionTree DimensionTree::unsplit(Index nx, Index ny, Index ntheta, Index nmu) {
  std::vector<TreeNode> nodes(5);
  nodes[0] = {{0, 1, 2, 3}, 1, 2, -1};
  nodes[1] = {{0, 1}, -1, -1, 0};
  nodes[2] = {{2, 3}, 3, 4, 0};
  nodes[3] = {{2}, -1, -1, 2};
  nodes[4] = {{3}, -1, -1, 2};
  return from_nodes(TreeKind::unsplit, {nx, ny, ntheta, nmu}, std::move(nodes));
}

DimensionTree DimensionTree::split(Index nx, Index ny, Index ntheta, Index nmu) {
  std::vector<TreeNode> nodes(7);
  nodes[0] = {{0, 1, 2, 3}, 1, 2, -1};
  nodes[1] = {{0, 1}, 3, 4, 0};
  nodes[2] = {{2, 3}, 5, 6, 0};
  nodes[3] = {{0}, -1, -1, 1};
  nodes[4] = {{1}, -1, -1, 1};
  nodes[5] = {{2}, -1, -1, 2};
  nodes[6] = {{3}, -1, -1, 2};
  return from_nodes(TreeKind::split, {nx, ny, ntheta, nmu}, std::move(nodes));
}

DimensionTree DimensionTree::spatial(Index nx, Index ny) {
  std::vector<TreeNode> nodes(3);
  nodes[0] = {{0, 1}, 1, 2, -1};
  nodes[1] = {{0}, -1, -1, 0};
  nodes[2] = {{1}, -1, -1, 0};
  return from_nodes(TreeKind::spatial, {nx, ny}, std::move(nodes));
}

DimensionTree DimensionTree::from_nodes(TreeKind kind, std::vector<Index> mode_sizes,
                                        std::vector<TreeNode> nodes) {
  const int d = static_cast<int>(mode_sizes.size());
  for (Index n : mode_sizes)
    if (n < 1) throw std::invalid_argument("mode sizes must be positive");
  if (nodes.empty()) throw std::invalid_argument("empty dimension tree");
  std::vector<int> root_dims(nodes[0].dims);
  std::vector<int> expect(d);
  for (int k = 0; k < d; ++k) expect[k] = k;
  if (root_dims != expect) throw std::invalid_argument("root must hold all dims in order");
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const auto& nd = nodes[t];
    if (nd.is_leaf()) continue;
    if (nd.left <= static_cast<int>(t) || nd.right <= static_cast<int>(t) ||
        nd.left >= static_cast<int>(nodes.size()) || nd.right >= static_cast<int>(nodes.size()))
      throw std::invalid_argument("children must follow their parent");
    std::vector<int> cat = nodes[nd.left].dims;
    cat.insert(cat.end(), nodes[nd.right].dims.begin(), nodes[nd.right].dims.end());
    if (cat != nd.dims) throw std::invalid_argument("children must partition the parent");
    if (nodes[nd.left].parent != static_cast<int>(t) || nodes[nd.right].parent != static_cast<int>(t))
      throw std::invalid_argument("inconsistent parent links");
  }
  DimensionTree tree;
  tree.kind_ = kind;
  tree.mode_sizes_ = std::move(mode_sizes);
  tree.nodes_ = std::move(nodes);
  return tree;
}

Index DimensionTree::node_size(int t) const {
  Index n = 1;
  for (int k : nodes_[t].dims) n *= mode_sizes_[k];
  return n;
}

int DimensionTree::leaf_of(int dim) const {
  for (int t = 0; t < size(); ++t) {
    const auto& nd = nodes_[t];
    if (nd.is_leaf() && std::find(nd.dims.begin(), nd.dims.end(), dim) != nd.dims.end()) return t;
  }
  throw std::out_of_range("no leaf holds the requested dimension");
}

int DimensionTree::node_with_dims(std::vector<int> dims) const {
  for (int t = 0; t < size(); ++t)
    if (nodes_[t].dims == dims) return t;
  throw std::out_of_range("no node with the requested dimensions");
}

std::string DimensionTree::label(int t) const {
  static const char* names4[] = {"x", "y", "theta", "mu"};
  std::string s = "{";
  for (std::size_t q = 0; q < nodes_[t].dims.size(); ++q) {
    if (q) s += ",";
    s += names4[nodes_[t].dims[q]];
  }
  return s + "}";
}

std::vector<int> DimensionTree::postorder() const {
  std::vector<int> order(size());
  for (int t = 0; t < size(); ++t) order[t] = size() - 1 - t;
  return order;
}

// ---------------------------------------------------------------------------
// HTensor

HTensor::HTensor(DimensionTree tree, std::vector<Mat> frames, bool orthogonal)
    : tree_(std::move(tree)), frames_(std::move(frames)), orthogonal_(orthogonal) {
  if (static_cast<int>(frames_.size()) != tree_.size())
    throw std::invalid_argument("frame count does not match tree");
  for (int t = 0; t < tree_.size(); ++t) {
    const auto& nd = tree_.node(t);
    const Mat& f = frames_[t];
    if (f.cols() < 1) throw std::invalid_argument("node rank must be >= 1");
    const Index rows = nd.is_leaf() ? tree_.node_size(t) : frames_[nd.left].cols() * frames_[nd.right].cols();
    if (f.rows() != rows) throw std::invalid_argument("frame shape inconsistent with ranks at node " + tree_.label(t));
  }
  if (frames_[0].cols() != 1) throw std::invalid_argument("root rank must be 1");
}

HTensor HTensor::zero(const DimensionTree& tree) {
  std::vector<Mat> frames(tree.size());
  for (int t = 0; t < tree.size(); ++t) {
    if (tree.node(t).is_leaf()) {
      frames[t] = Mat::Zero(tree.node_size(t), 1);
      frames[t](0, 0) = 1.0;
    } else {
      frames[t] = Mat::Ones(1, 1);
    }
  }
  frames[0](0, 0) = 0.0;
  return HTensor(tree, std::move(frames), true);
}

std::vector<Index> HTensor::ranks() const {
  std::vector<Index> r(frames_.size());
  for (std::size_t t = 0; t < frames_.size(); ++t) r[t] = frames_[t].cols();
  return r;
}

Index HTensor::max_rank() const {
  Index m = 0;
  for (const auto& f : frames_) m = std::max(m, f.cols());
  return m;
}

// ---------------------------------------------------------------------------
// construction and evaluation

HTensor from_full(const DenseTensor& a, const DimensionTree& tree, double rel_tol, Index max_rank) {
  if (a.shape() != tree.mode_sizes()) throw std::invalid_argument("dense shape does not match tree");
  if (max_rank < 1) throw std::invalid_argument("max_rank must be >= 1");
  if (rel_tol < 0.0) throw std::invalid_argument("negative tolerance");
  const double nrm = a.norm();
  if (!(nrm >= kZeroNorm)) return HTensor::zero(tree);
  const double tol = rel_tol * nrm / std::sqrt(static_cast<double>(tree.non_root_count()));
  const int n = tree.size();
  std::vector<Mat> basis(n);
  bool cap = false;
  double dropped = 0.0;
  for (int t = 1; t < n; ++t) {
    Mat u;
    Vec s;
    left_svd(matricize(a, tree.node(t).dims), u, s);
    const Index k = choose_rank(s, tol, max_rank, cap, dropped);
    basis[t] = u.leftCols(std::min<Index>(k, u.cols()));
  }
  std::vector<Mat> frames(n);
  for (int t = n - 1; t >= 0; --t) {
    const auto& nd = tree.node(t);
    if (nd.is_leaf()) {
      frames[t] = basis[t];
      continue;
    }
    const Mat& ul = basis[nd.left];
    const Mat& ur = basis[nd.right];
    const Index nl = tree.node_size(nd.left), nr = tree.node_size(nd.right);
    if (t == 0) {
      const Mat am = matricize(a, tree.node(nd.left).dims);
      const Mat core = ul.transpose() * am * ur;
      frames[0] = Eigen::Map<const Mat>(core.data(), core.size(), 1);
    } else {
      Mat f(ul.cols() * ur.cols(), basis[t].cols());
      for (Index k = 0; k < basis[t].cols(); ++k) {
        Eigen::Map<const Mat> x(basis[t].data() + k * basis[t].rows(), nl, nr);
        const Mat core = ul.transpose() * x * ur;
        f.col(k) = Eigen::Map<const Vec>(core.data(), core.size());
      }
      frames[t] = std::move(f);
    }
  }
  return orthogonalize(HTensor(tree, std::move(frames)));
}

DenseTensor to_full(const HTensor& ht, Index memory_guard) {
  const auto& tree = ht.tree();
  Index total = 1;
  for (Index s : tree.mode_sizes()) total *= s;
  if (total > memory_guard) throw std::length_error("to_full exceeds memory guard");
  std::vector<Mat> basis(tree.size());
  for (int t : tree.postorder()) {
    const auto& nd = tree.node(t);
    if (nd.is_leaf()) {
      basis[t] = ht.frame(t);
      continue;
    }
    const Mat& ul = basis[nd.left];
    const Mat& ur = basis[nd.right];
    const Index rt = ht.rank(t);
    if (ul.rows() * ur.rows() * rt > memory_guard) throw std::length_error("to_full exceeds memory guard");
    Mat out(ul.rows() * ur.rows(), rt);
    for (Index k = 0; k < rt; ++k) {
      Eigen::Map<const Mat> bk(ht.frame(t).data() + k * ht.frame(t).rows(), ul.cols(), ur.cols());
      Eigen::Map<Mat> ok(out.data() + k * out.rows(), ul.rows(), ur.rows());
      ok.noalias() = ul * bk * ur.transpose();
    }
    basis[nd.left].resize(0, 0);
    basis[nd.right].resize(0, 0);
    basis[t] = std::move(out);
  }
  std::vector<double> data(basis[0].data(), basis[0].data() + basis[0].size());
  return DenseTensor(tree.mode_sizes(), std::move(data));
}

HTensor orthogonalize(const HTensor& ht) {
  if (ht.is_orthogonal()) return ht;
  const auto& tree = ht.tree();
  std::vector<Mat> frames = ht.frames();
  std::vector<Mat> r(tree.size());
  for (int t : tree.postorder()) {
    const auto& nd = tree.node(t);
    if (!nd.is_leaf()) {
      Mat f = left_mult(frames[t], r[nd.left].cols(), r[nd.right].cols(), r[nd.left]);
      frames[t] = right_mult(f, r[nd.left].rows(), r[nd.right].cols(), r[nd.right]);
    }
    if (t == 0) break;
    QR qr = thin_qr(frames[t]);
    frames[t] = std::move(qr.q);
    r[t] = std::move(qr.r);
  }
  return HTensor(tree, std::move(frames), true);
}

HTensor truncate(const HTensor& ht, double rel_tol, Index max_rank, TruncationReport* report) {
  return truncate_orthogonal(orthogonalize(ht), rel_tol, max_rank, report);
}

std::vector<NodeSpectrum> node_spectra(const HTensor& ht) {
  const HTensor o = orthogonalize(ht);
  if (!(o.frame(0).norm() >= kZeroNorm)) return zero_spectra(o.tree());
  return spectra_from(o.tree(), top_down_svd(o));
}

// ---------------------------------------------------------------------------
// arithmetic

HTensor add(const HTensor& a, const HTensor& b) {
  check_same_tree(a, b);
  const auto& tree = a.tree();
  std::vector<Mat> frames(tree.size());
  for (int t = 0; t < tree.size(); ++t) {
    const auto& nd = tree.node(t);
    const Mat& fa = a.frame(t);
    const Mat& fb = b.frame(t);
    if (nd.is_leaf()) {
      Mat f(fa.rows(), fa.cols() + fb.cols());
      f << fa, fb;
      frames[t] = std::move(f);
      continue;
    }
    const Index la = a.rank(nd.left), ra = a.rank(nd.right);
    const Index lb = b.rank(nd.left), rb = b.rank(nd.right);
    const Index L = la + lb, R = ra + rb;
    const Index cols = t == 0 ? 1 : fa.cols() + fb.cols();
    Mat f = Mat::Zero(L * R, cols);
    for (Index k = 0; k < fa.cols(); ++k)
      for (Index j = 0; j < ra; ++j)
        for (Index i = 0; i < la; ++i) f(i + L * j, k) += fa(i + la * j, k);
    const Index off = t == 0 ? 0 : fa.cols();
    for (Index k = 0; k < fb.cols(); ++k)
      for (Index j = 0; j < rb; ++j)
        for (Index i = 0; i < lb; ++i) f(la + i + L * (ra + j), off + k) += fb(i + lb * j, k);
    frames[t] = std::move(f);
  }
  return HTensor(tree, std::move(frames));
}

HTensor scale(const HTensor& a, double c) {
  std::vector<Mat> frames = a.frames();
  frames[0] *= c;
  return HTensor(a.tree(), std::move(frames), a.is_orthogonal());
}

HTensor orthogonal_sum(std::span<const Term> terms) {
  if (terms.empty()) throw std::invalid_argument("empty sum");
  std::vector<Term> live;
  for (const auto& term : terms) {
    check_same_tree(*terms[0].tensor, *term.tensor);
    if (term.coeff != 0.0) live.push_back(term);
  }
  const auto& tree = terms[0].tensor->tree();
  if (live.empty()) return HTensor::zero(tree);
  const std::size_t m = live.size();
  const int n = tree.size();
  // r[t][i]: coefficient block of term i in the new orthonormal frame of t
  std::vector<std::vector<Mat>> r(n, std::vector<Mat>(m));
  std::vector<Mat> frames(n);
  for (int t : tree.postorder()) {
    const auto& nd = tree.node(t);
    std::vector<Mat> parts(m);
    for (std::size_t i = 0; i < m; ++i) {
      const HTensor& a = *live[i].tensor;
      if (nd.is_leaf()) {
        parts[i] = a.frame(t);
      } else {
        const Mat& rl = r[nd.left][i];
        const Mat& rr = r[nd.right][i];
        Mat f = left_mult(a.frame(t), a.rank(nd.left), a.rank(nd.right), rl);
        parts[i] = right_mult(f, rl.rows(), a.rank(nd.right), rr);
      }
    }
    if (t == 0) {
      Mat f = live[0].coeff * parts[0];
      for (std::size_t i = 1; i < m; ++i) f += live[i].coeff * parts[i];
      frames[0] = std::move(f);
      break;
    }
    Index cols = 0;
    for (const auto& p : parts) cols += p.cols();
    Mat cat(parts[0].rows(), cols);
    Index off = 0;
    for (const auto& p : parts) {
      cat.middleCols(off, p.cols()) = p;
      off += p.cols();
    }
    QR qr = thin_qr(cat);
    frames[t] = std::move(qr.q);
    off = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const Index w = parts[i].cols();
      r[t][i] = qr.r.middleCols(off, w);
      off += w;
    }
  }
  return HTensor(tree, std::move(frames), true);
}

HTensor truncated_sum(std::span<const Term> terms, double rel_tol, Index max_rank,
                      TruncationReport* report) {
  return truncate_orthogonal(orthogonal_sum(terms), rel_tol, max_rank, report);
}

HTensor apply_leaf_operator(const HTensor& ht, int leaf, const Mat& op) {
  return apply_leaf_operator(ht, leaf, LeafMap([&op](const Mat& u) -> Mat { return op * u; }));
}

HTensor apply_leaf_operator(const HTensor& ht, int leaf, const LeafMap& op) {
  if (leaf < 0 || leaf >= ht.tree().size() || !ht.tree().node(leaf).is_leaf())
    throw std::out_of_range("unknown leaf");
  std::vector<Mat> frames = ht.frames();
  Mat out = op(frames[leaf]);
  if (out.rows() != frames[leaf].rows() || out.cols() != frames[leaf].cols())
    throw std::invalid_argument("leaf operator dimension mismatch");
  frames[leaf] = std::move(out);
  return HTensor(ht.tree(), std::move(frames));
}

HTensor scale_leaf_rows(const HTensor& ht, int leaf, const Vec& factor) {
  if (leaf < 0 || leaf >= ht.tree().size() || !ht.tree().node(leaf).is_leaf())
    throw std::out_of_range("unknown leaf");
  if (factor.size() != ht.frame(leaf).rows()) throw std::invalid_argument("row factor length mismatch");
  std::vector<Mat> frames = ht.frames();
  frames[leaf] = factor.asDiagonal() * frames[leaf];
  return HTensor(ht.tree(), std::move(frames));
}

// ---------------------------------------------------------------------------
// spatial / angular structure

Mat SpatialField::dense() const {
  if (const auto* m = std::get_if<Mat>(&value)) return *m;
  const HTensor& h = std::get<HTensor>(value);
  const Mat& b = h.frame(0);
  Eigen::Map<const Mat> core(b.data(), h.rank(1), h.rank(2));
  return h.frame(1) * core * h.frame(2).transpose();
}

SpatialField contract_angular(const HTensor& ht, const Vec& w_theta, const Vec& w_mu,
                              const Mat* factor) {
  const auto& tree = ht.tree();
  if (tree.order() != 4) throw std::invalid_argument("angular contraction needs a 4-D tree");
  const Index nth = tree.mode_sizes()[2], nmu = tree.mode_sizes()[3];
  if (w_theta.size() != nth || w_mu.size() != nmu) throw std::invalid_argument("quadrature weight length mismatch");
  Mat w = w_theta * w_mu.transpose() / (4.0 * std::numbers::pi);
  if (factor) {
    if (factor->rows() != nth || factor->cols() != nmu) throw std::invalid_argument("angular factor shape mismatch");
    w = w.cwiseProduct(*factor);
  }
  const int ang = 2;
  const auto& an = tree.node(ang);
  const Mat p = ht.frame(an.left).transpose() * w * ht.frame(an.right);
  const Vec c = ht.frame(ang).transpose() * Eigen::Map<const Vec>(p.data(), p.size());
  Eigen::Map<const Mat> root(ht.frame(0).data(), ht.rank(1), ht.rank(2));
  const Vec v = root * c;
  const Index nx = tree.mode_sizes()[0], ny = tree.mode_sizes()[1];
  if (tree.kind() == TreeKind::unsplit) {
    const Vec flat = ht.frame(1) * v;
    return {Mat(Eigen::Map<const Mat>(flat.data(), nx, ny))};
  }
  const auto& sn = tree.node(1);
  std::vector<Mat> frames(3);
  frames[0] = ht.frame(1) * v;
  frames[1] = ht.frame(sn.left);
  frames[2] = ht.frame(sn.right);
  return {HTensor(DimensionTree::spatial(nx, ny), std::move(frames))};
}

HTensor compress_spatial(const Mat& field, double rel_tol, Index max_rank) {
  const auto tree = DimensionTree::spatial(field.rows(), field.cols());
  const double nrm = field.norm();
  if (!(nrm >= kZeroNorm)) return HTensor::zero(tree);
  const auto svd = thin_svd(field, true);
  bool cap = false;
  double dropped = 0.0;
  const Index k = choose_rank(svd.s, rel_tol * nrm / std::sqrt(2.0), max_rank, cap, dropped);
  std::vector<Mat> frames(3);
  Mat core = svd.s.head(k).asDiagonal();
  frames[0] = Eigen::Map<const Mat>(core.data(), k * k, 1);
  frames[1] = svd.u.leftCols(k);
  frames[2] = svd.v.leftCols(k);
  return HTensor(tree, std::move(frames), true);
}

HTensor separable(const DimensionTree& tree, const SpatialField& s, const Vec& v_theta,
                  const Vec& v_mu) {
  if (tree.order() != 4) throw std::invalid_argument("separable needs a 4-D tree");
  const auto& ms = tree.mode_sizes();
  if (v_theta.size() != ms[2] || v_mu.size() != ms[3]) throw std::invalid_argument("angular factor length mismatch");
  std::vector<Mat> frames(tree.size());
  frames[0] = Mat::Ones(1, 1);
  frames[2] = Mat::Ones(1, 1);
  frames[tree.node(2).left] = v_theta;
  frames[tree.node(2).right] = v_mu;
  if (tree.kind() == TreeKind::unsplit) {
    const Mat d = s.dense();
    if (d.rows() != ms[0] || d.cols() != ms[1]) throw std::invalid_argument("spatial field shape mismatch");
    frames[1] = Eigen::Map<const Mat>(d.data(), d.size(), 1);
  } else {
    const HTensor h = std::holds_alternative<HTensor>(s.value)
                          ? std::get<HTensor>(s.value)
                          : compress_spatial(std::get<Mat>(s.value), 1e-15);
    if (h.tree().mode_sizes()[0] != ms[0] || h.tree().mode_sizes()[1] != ms[1])
      throw std::invalid_argument("spatial field shape mismatch");
    frames[1] = h.frame(0);
    frames[3] = h.frame(1);
    frames[4] = h.frame(2);
  }
  return HTensor(tree, std::move(frames));
}

HTensor hadamard(const HTensor& a, const HTensor& b, double rel_tol, Index max_rank) {
  check_same_tree(a, b);
  const auto& tree = a.tree();
  const int n = tree.size();
  std::vector<Mat> frames(n), r(n);
  for (int t : tree.postorder()) {
    const auto& nd = tree.node(t);
    Mat hat;
    if (nd.is_leaf()) {
      hat = khatri_rao(a.frame(t), b.frame(t));
    } else {
      const int l = nd.left, rc = nd.right;
      const Index rla = a.rank(l), rra = a.rank(rc), rlb = b.rank(l), rrb = b.rank(rc);
      const Mat& Rl = r[l];
      const Mat& Rr = r[rc];
      const Index ql = Rl.rows(), qr = Rr.rows();
      const Index rta = a.rank(t), rtb = b.rank(t);
      hat.resize(ql * qr, rta * rtb);
      Mat t1(ql * rra, rlb);
      for (Index kb = 0; kb < rtb; ++kb) {
        Eigen::Map<const Mat> bb(b.frame(t).data() + kb * b.frame(t).rows(), rlb, rrb);
        for (Index ka = 0; ka < rta; ++ka) {
          Eigen::Map<const Mat> ba(a.frame(t).data() + ka * a.frame(t).rows(), rla, rra);
          for (Index jb = 0; jb < rlb; ++jb) {
            Eigen::Map<Mat> blk(t1.data() + jb * t1.rows(), ql, rra);
            blk.noalias() = Rl.middleCols(jb * rla, rla) * ba;
          }
          const Mat t2 = t1 * bb;
          Eigen::Map<const Mat> t2v(t2.data(), ql, rra * rrb);
          Eigen::Map<Mat> x(hat.data() + (ka + rta * kb) * hat.rows(), ql, qr);
          x.noalias() = t2v * Rr.transpose();
        }
      }
    }
    if (t == 0) {
      frames[0] = std::move(hat);
      break;
    }
    QR qr = thin_qr(hat);
    frames[t] = std::move(qr.q);
    r[t] = std::move(qr.r);
  }
  return truncate_orthogonal(HTensor(tree, std::move(frames), true), rel_tol, max_rank, nullptr);
}

HTensor multiply_spatial(const HTensor& ht, const Mat& field) {
  const auto& tree = ht.tree();
  const auto& ms = tree.mode_sizes();
  if (tree.order() != 4 || field.rows() != ms[0] || field.cols() != ms[1])
    throw std::invalid_argument("spatial field shape mismatch");
  const Eigen::Map<const Vec> f(field.data(), field.size());
  if (tree.kind() == TreeKind::unsplit) return scale_leaf_rows(ht, 1, f);
  // Split tree: expand the {x,y} node basis, scale its rows, and store it as
  // the new transfer tensor over identity leaf bases. Exact.
  const auto& sn = tree.node(1);
  const Mat& ux = ht.frame(sn.left);
  const Mat& uy = ht.frame(sn.right);
  const Index rxy = ht.rank(1);
  Mat w(ms[0] * ms[1], rxy);
  for (Index k = 0; k < rxy; ++k) {
    Eigen::Map<const Mat> bk(ht.frame(1).data() + k * ht.frame(1).rows(), ux.cols(), uy.cols());
    Eigen::Map<Mat> wk(w.data() + k * w.rows(), ms[0], ms[1]);
    wk.noalias() = ux * bk * uy.transpose();
  }
  w = f.asDiagonal() * w;
  std::vector<Mat> frames = ht.frames();
  frames[1] = std::move(w);
  frames[sn.left] = Mat::Identity(ms[0], ms[0]);
  frames[sn.right] = Mat::Identity(ms[1], ms[1]);
  return HTensor(tree, std::move(frames));
}

namespace {

// Orthonormal leaf basis u and Gram h of the complementary factor, so that the
// leaf matricization satisfies A A^T = u h u^T.
std::pair<Mat, Mat> leaf_gram(const HTensor& ht, int leaf) {
  const auto& tree = ht.tree();
  if (leaf < 0 || leaf >= tree.size() || !tree.node(leaf).is_leaf()) throw std::out_of_range("unknown leaf");
  const HTensor o = orthogonalize(ht);
  std::vector<Mat> h(tree.size());
  h[0] = Mat::Ones(1, 1);
  for (int t = 0; t < tree.size(); ++t) {
    const auto& nd = tree.node(t);
    if (nd.is_leaf()) continue;
    const Index rl = o.rank(nd.left), rr = o.rank(nd.right), rt = o.rank(t);
    const Mat y = o.frame(t) * h[t];
    Eigen::Map<const Mat> yl(y.data(), rl, rr * rt);
    Eigen::Map<const Mat> tl(o.frame(t).data(), rl, rr * rt);
    h[nd.left] = yl * tl.transpose();
    h[nd.right] = right_matricization(y, rl, rr) * right_matricization(o.frame(t), rl, rr).transpose();
  }
  return {o.frame(leaf), h[leaf]};
}

}  // namespace

Vec leaf_mean_square(const HTensor& ht, int leaf) {
  const auto [u, h] = leaf_gram(ht, leaf);
  Index total = 1;
  for (Index s : ht.tree().mode_sizes()) total *= s;
  const double count = static_cast<double>(total / u.rows());
  return (u * h).cwiseProduct(u).rowwise().sum() / count;
}

Mat leaf_gram_factor(const HTensor& ht, int leaf) {
  const auto [u, h] = leaf_gram(ht, leaf);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
  const Vec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return u * es.eigenvectors() * lam.asDiagonal();
}

Index ndofs(const HTensor& ht) {
  Index n = 0;
  for (const auto& f : ht.frames()) n += f.size();
  return n;
}

double norm(const HTensor& ht) { return orthogonalize(ht).frame(0).norm(); }

double orthogonality_defect(const HTensor& ht) {
  double worst = 0.0;
  for (int t = 1; t < ht.tree().size(); ++t) {
    const Mat& f = ht.frame(t);
    const Mat g = f.transpose() * f - Mat::Identity(f.cols(), f.cols());
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace lrt
