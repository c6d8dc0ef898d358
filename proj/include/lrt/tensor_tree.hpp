#pragma once

#include "lrt/dense_tensor.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lrt {

inline constexpr Index kDefaultMaxRank = 512;
inline constexpr Index kDefaultMemoryGuard = Index{1} << 28;

enum class TreeKind { unsplit, split, spatial };

struct TreeNode {
  std::vector<int> dims;  // flattening order of the node, first fastest
  int left = -1;
  int right = -1;
  int parent = -1;
  bool is_leaf() const { return left < 0; }
};

// Binary dimension tree. Nodes are stored breadth-first with the root at 0.
//   unsplit: 0 {x,y,th,mu}  1 {x,y}  2 {th,mu}  3 {th}  4 {mu}
//   split:   0 {x,y,th,mu}  1 {x,y}  2 {th,mu}  3 {x}  4 {y}  5 {th}  6 {mu}
//   spatial: 0 {x,y}  1 {x}  2 {y}
class DimensionTree {
 public:
  static DimensionTree unsplit(Index nx, Index ny, Index ntheta, Index nmu);
  static DimensionTree split(Index nx, Index ny, Index ntheta, Index nmu);
  static DimensionTree spatial(Index nx, Index ny);

  TreeKind kind() const { return kind_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int order() const { return static_cast<int>(mode_sizes_.size()); }
  const TreeNode& node(int t) const { return nodes_[t]; }
  const std::vector<Index>& mode_sizes() const { return mode_sizes_; }
  Index node_size(int t) const;
  int leaf_of(int dim) const;
  int node_with_dims(std::vector<int> dims) const;
  std::string label(int t) const;
  std::vector<int> postorder() const;  // children before parents, root last
  int non_root_count() const { return size() - 1; }

  bool operator==(const DimensionTree& o) const {
    return kind_ == o.kind_ && mode_sizes_ == o.mode_sizes_;
  }

  // Assemble a tree from explicit nodes (used when loading from disk).
  static DimensionTree from_nodes(TreeKind kind, std::vector<Index> mode_sizes,
                                  std::vector<TreeNode> nodes);

 private:
  TreeKind kind_ = TreeKind::unsplit;
  std::vector<Index> mode_sizes_;
  std::vector<TreeNode> nodes_;
};

// Hierarchical Tucker tensor. frame(t) is the leaf basis (n_t x r_t) for a
// leaf and the matricized transfer tensor ((r_left*r_right) x r_t, left index
// fastest) for an interior node, so that U_t = (U_right kron U_left) B_t.
class HTensor {
 public:
  HTensor() = default;
  HTensor(DimensionTree tree, std::vector<Eigen::MatrixXd> frames, bool orthogonal = false);

  static HTensor zero(const DimensionTree& tree);

  const DimensionTree& tree() const { return tree_; }
  const Eigen::MatrixXd& frame(int t) const { return frames_[t]; }
  const std::vector<Eigen::MatrixXd>& frames() const { return frames_; }
  Index rank(int t) const { return frames_[t].cols(); }
  std::vector<Index> ranks() const;
  Index max_rank() const;
  // True when every non-root frame is known to have orthonormal columns.
  bool is_orthogonal() const { return orthogonal_; }

 private:
  DimensionTree tree_;
  std::vector<Eigen::MatrixXd> frames_;
  bool orthogonal_ = false;
};

struct NodeSpectrum {
  int node = 0;
  std::string label;
  Eigen::VectorXd sigma;  // descending
};

struct TruncationReport {
  std::vector<NodeSpectrum> spectra;  // of the input tensor
  double discarded = 0.0;             // root-sum-square of dropped singular values
  bool cap_reached = false;
};

HTensor from_full(const DenseTensor& a, const DimensionTree& tree, double rel_tol,
                  Index max_rank = kDefaultMaxRank);
DenseTensor to_full(const HTensor& ht, Index memory_guard = kDefaultMemoryGuard);

HTensor orthogonalize(const HTensor& ht);
HTensor truncate(const HTensor& ht, double rel_tol, Index max_rank = kDefaultMaxRank,
                 TruncationReport* report = nullptr);
std::vector<NodeSpectrum> node_spectra(const HTensor& ht);

HTensor add(const HTensor& a, const HTensor& b);
HTensor scale(const HTensor& a, double c);

struct Term {
  double coeff;
  const HTensor* tensor;
};
// Exact sum of c_i * A_i built leaves-to-root with QR at every node, so the
// result is orthogonalized and its ranks never exceed the node sizes. Much
// cheaper than repeated add() followed by truncate() for many terms.
HTensor orthogonal_sum(std::span<const Term> terms);
HTensor truncated_sum(std::span<const Term> terms, double rel_tol,
                      Index max_rank = kDefaultMaxRank, TruncationReport* report = nullptr);

using LeafMap = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;
HTensor apply_leaf_operator(const HTensor& ht, int leaf, const Eigen::MatrixXd& op);
HTensor apply_leaf_operator(const HTensor& ht, int leaf, const LeafMap& op);
HTensor scale_leaf_rows(const HTensor& ht, int leaf, const Eigen::VectorXd& factor);

// Spatial result of an angular contraction: a dense nx x ny matrix (x fastest)
// for the unsplit tree, a 2-D HTensor over the spatial tree for the split tree.
struct SpatialField {
  std::variant<Eigen::MatrixXd, HTensor> value;
  Eigen::MatrixXd dense() const;
};

// (1/4pi) sum_{k,l} w_theta[k] w_mu[l] factor(k,l) A(., ., k, l)
SpatialField contract_angular(const HTensor& ht, const Eigen::VectorXd& w_theta,
                              const Eigen::VectorXd& w_mu,
                              const Eigen::MatrixXd* factor = nullptr);

// s(x,y) (x) v_theta (x) v_mu on a 4-D tree. The spatial part is a dense
// matrix for the unsplit tree; for the split tree either a dense matrix
// (compressed losslessly) or a spatial HTensor.
HTensor separable(const DimensionTree& tree, const SpatialField& s,
                  const Eigen::VectorXd& v_theta, const Eigen::VectorXd& v_mu);

// Elementwise product, exact per node then truncated.
HTensor hadamard(const HTensor& a, const HTensor& b, double rel_tol,
                 Index max_rank = kDefaultMaxRank);

// Elementwise multiplication by a field that depends only on (x,y). Exact;
// the caller truncates.
HTensor multiply_spatial(const HTensor& ht, const Eigen::MatrixXd& field);

// Mean over all other dims of A^2, as a function of the leaf's index.
Eigen::VectorXd leaf_mean_square(const HTensor& ht, int leaf);
// V with V V^T = A A^T for the leaf matricization A (n_leaf x r).
Eigen::MatrixXd leaf_gram_factor(const HTensor& ht, int leaf);

Index ndofs(const HTensor& ht);
double norm(const HTensor& ht);
// Largest |F^T F - I| entry over all non-root frames.
double orthogonality_defect(const HTensor& ht);

// Lossless low-rank form of a dense spatial field on the spatial tree.
HTensor compress_spatial(const Eigen::MatrixXd& field, double rel_tol,
                         Index max_rank = kDefaultMaxRank);

}  // namespace lrt
