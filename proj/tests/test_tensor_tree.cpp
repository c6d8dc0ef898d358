#include "lrt/tensor_io.hpp"
#include "lrt/tensor_tree.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace lrt {
namespace {

using testing::random_htensor;
using testing::random_vector;
using testing::rel_diff;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

DimensionTree small_tree(TreeKind kind) {
  return kind == TreeKind::unsplit ? DimensionTree::unsplit(6, 5, 4, 3) : DimensionTree::split(6, 5, 4, 3);
}

std::vector<Index> uniform_ranks(const DimensionTree& tree, Index r) {
  return std::vector<Index>(tree.size(), r);
}

// Oracle: singular values of each dense node matricization.
std::vector<Vec> dense_spectra(const DenseTensor& a, const DimensionTree& tree) {
  std::vector<Vec> out(tree.size());
  for (int t = 1; t < tree.size(); ++t) {
    Eigen::JacobiSVD<Mat> svd(matricize(a, tree.node(t).dims));
    out[t] = svd.singularValues();
  }
  return out;
}

double discarded_bound(const std::vector<Vec>& spectra, const std::vector<Index>& ranks) {
  double s = 0.0;
  for (std::size_t t = 1; t < spectra.size(); ++t)
    for (Index i = ranks[t]; i < spectra[t].size(); ++i) s += spectra[t](i) * spectra[t](i);
  return std::sqrt(s);
}

TEST(DimensionTree, CanonicalLayouts) {
  auto u = DimensionTree::unsplit(8, 8, 4, 2);
  EXPECT_EQ(u.size(), 5);
  EXPECT_TRUE(u.node(1).is_leaf());
  EXPECT_EQ(u.node_size(1), 64);
  EXPECT_EQ(u.label(1), "{x,y}");
  EXPECT_EQ(u.leaf_of(0), 1);
  EXPECT_EQ(u.leaf_of(1), 1);
  EXPECT_EQ(u.leaf_of(3), 4);
  auto s = DimensionTree::split(8, 8, 4, 2);
  EXPECT_EQ(s.size(), 7);
  EXPECT_EQ(s.leaf_of(0), 3);
  EXPECT_EQ(s.leaf_of(1), 4);
  EXPECT_EQ(s.label(2), "{theta,mu}");
  EXPECT_EQ(s.non_root_count(), 6);
  for (int t : s.postorder())
    if (!s.node(t).is_leaf()) {
      EXPECT_GT(s.node(t).left, t);
    }
}

TEST(DimensionTree, RejectsBadPartition) {
  std::vector<TreeNode> nodes(3);
  nodes[0] = {{0, 1}, 1, 2, -1};
  nodes[1] = {{0}, -1, -1, 0};
  nodes[2] = {{0}, -1, -1, 0};
  EXPECT_THROW(DimensionTree::from_nodes(TreeKind::spatial, {3, 3}, nodes), std::invalid_argument);
}

class BothTrees : public ::testing::TestWithParam<TreeKind> {};

TEST_P(BothTrees, FromFullRankOneIsExact) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(1);
  const auto& m = tree.mode_sizes();
  DenseTensor a = outer({random_vector(m[0], rng), random_vector(m[1], rng), random_vector(m[2], rng),
                         random_vector(m[3], rng)});
  HTensor h = from_full(a, tree, 1e-8);
  for (Index r : h.ranks()) EXPECT_EQ(r, 1);
  EXPECT_LE(rel_diff(to_full(h), a), 1e-12);
}

TEST_P(BothTrees, ZeroTensorIsCanonical) {
  auto tree = small_tree(GetParam());
  DenseTensor z(tree.mode_sizes());
  HTensor h = from_full(z, tree, 1e-4);
  for (Index r : h.ranks()) EXPECT_EQ(r, 1);
  EXPECT_EQ(to_full(h).norm(), 0.0);
  for (const auto& s : node_spectra(h)) {
    ASSERT_EQ(s.sigma.size(), 1);
    EXPECT_EQ(s.sigma(0), 0.0);
  }
  HTensor t = truncate(scale(h, 3.0), 1e-4);
  EXPECT_EQ(to_full(t).norm(), 0.0);
}

TEST_P(BothTrees, LosslessRoundTrip) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(2);
  DenseTensor a = DenseTensor::random(tree.mode_sizes(), rng);
  HTensor h = from_full(a, tree, 0.0, 100000);
  EXPECT_LE(rel_diff(to_full(h), a), 1e-12);
  EXPECT_LE(orthogonality_defect(h), 1e-12);
}

TEST_P(BothTrees, FromFullObeysDiscardedBound) {
  auto tree = GetParam() == TreeKind::unsplit ? DimensionTree::unsplit(16, 16, 8, 8)
                                              : DimensionTree::split(16, 16, 8, 8);
  std::mt19937_64 rng(3);
  // random tensor with decaying structure so truncation actually bites
  DenseTensor a = to_full(random_htensor(tree, uniform_ranks(tree, 4), rng));
  a = a + 1e-5 * DenseTensor::random(tree.mode_sizes(), rng);
  HTensor h = from_full(a, tree, 1e-4);
  const double err = (to_full(h).vec() - a.vec()).norm();
  const double bound = discarded_bound(dense_spectra(a, tree), h.ranks());
  EXPECT_LE(err, bound * (1 + 1e-10));
  EXPECT_LE(err, 1e-4 * a.norm() * (1 + 1e-10));
  EXPECT_LT(h.max_rank(), 16);
}

TEST(HTensor, UnitColumnsGiveSingleEntry) {
  auto tree = DimensionTree::split(3, 4, 2, 2);
  std::vector<Mat> frames(tree.size());
  for (int t = 0; t < tree.size(); ++t) {
    frames[t] = tree.node(t).is_leaf() ? Mat(Mat::Zero(tree.node_size(t), 1)) : Mat(Mat::Ones(1, 1));
    if (tree.node(t).is_leaf()) frames[t](0, 0) = 1.0;
  }
  DenseTensor d = to_full(HTensor(tree, frames));
  EXPECT_EQ(d(0, 0, 0, 0), 1.0);
  EXPECT_EQ(d.vec().cwiseAbs().sum(), 1.0);
}

TEST(HTensor, RejectsInconsistentRanks) {
  auto tree = DimensionTree::unsplit(3, 3, 2, 2);
  std::mt19937_64 rng(4);
  auto frames = random_htensor(tree, {1, 2, 2, 2, 2}, rng).frames();
  frames[2] = Mat::Ones(3, 2);
  EXPECT_THROW(HTensor(tree, frames), std::invalid_argument);
}

TEST(HTensor, MemoryGuard) {
  auto tree = DimensionTree::unsplit(8, 8, 8, 8);
  EXPECT_THROW(to_full(HTensor::zero(tree), 1000), std::length_error);
}

TEST_P(BothTrees, AddMatchesDenseAndAddsRanks) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(5);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  HTensor b = random_htensor(tree, uniform_ranks(tree, 3), rng);
  HTensor c = add(a, b);
  for (int t = 1; t < tree.size(); ++t) EXPECT_EQ(c.rank(t), 5);
  EXPECT_EQ(c.rank(0), 1);
  EXPECT_LE(rel_diff(to_full(c), to_full(a) + to_full(b)), 1e-12);
  EXPECT_LE(to_full(add(a, scale(a, -1.0))).norm(), 1e-12 * to_full(a).norm());
}

TEST_P(BothTrees, ScaleIsExact) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(6);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  EXPECT_EQ(to_full(scale(a, 0.0)).norm(), 0.0);
  EXPECT_EQ(rel_diff(to_full(scale(a, 1.0)), to_full(a)), 0.0);
  EXPECT_LE(rel_diff(to_full(scale(scale(a, 2.0), 0.5)), to_full(a)), 1e-14);
}

TEST_P(BothTrees, OrthogonalSumMatchesDense) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(7);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  HTensor b = random_htensor(tree, uniform_ranks(tree, 3), rng);
  HTensor c = random_htensor(tree, uniform_ranks(tree, 1), rng);
  std::vector<Term> terms{{0.5, &a}, {-2.0, &b}, {3.0, &c}};
  HTensor s = orthogonal_sum(terms);
  EXPECT_TRUE(s.is_orthogonal());
  EXPECT_LE(orthogonality_defect(s), 1e-12);
  DenseTensor want = 0.5 * to_full(a) + (-2.0) * to_full(b) + 3.0 * to_full(c);
  EXPECT_LE(rel_diff(to_full(s), want), 1e-12);
  for (int t = 1; t < tree.size(); ++t) EXPECT_LE(s.rank(t), tree.node(t).is_leaf() ? tree.node_size(t) : 36);
}

TEST_P(BothTrees, TruncateRankOneIsIdentity) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(8);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 1), rng);
  for (double tol : {0.0, 1e-8, 0.5, 10.0}) {
    HTensor t = truncate(a, tol);
    for (Index r : t.ranks()) EXPECT_EQ(r, 1);
    EXPECT_LE(rel_diff(to_full(t), to_full(a)), 1e-13);
  }
}

TEST_P(BothTrees, TruncateZeroToleranceIsLossless) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(9);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  HTensor t = truncate(a, 0.0, 512);
  EXPECT_LE(rel_diff(to_full(t), to_full(a)), 1e-12);
}

TEST_P(BothTrees, TruncateErrorWithinToleranceAndSpectra) {
  auto tree = GetParam() == TreeKind::unsplit ? DimensionTree::unsplit(16, 16, 8, 8)
                                              : DimensionTree::split(16, 16, 8, 8);
  std::mt19937_64 rng(10);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 12), rng);
  const DenseTensor full = to_full(a);
  TruncationReport rep;
  HTensor t = truncate(a, 1e-2, 512, &rep);
  const double err = (to_full(t).vec() - full.vec()).norm();
  EXPECT_LE(err, 1e-2 * full.norm());
  EXPECT_LE(err, rep.discarded * (1 + 1e-10));
  const auto dense = dense_spectra(full, tree);
  EXPECT_LE(err, discarded_bound(dense, t.ranks()) * (1 + 1e-10));
  for (int t2 = 1; t2 < tree.size(); ++t2) EXPECT_LE(t.rank(t2), a.rank(t2));
  EXPECT_LE(orthogonality_defect(t), 1e-12);
}

TEST_P(BothTrees, TruncateRespectsRankCap) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(11);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 4), rng);
  TruncationReport rep;
  HTensor t = truncate(a, 0.0, 2, &rep);
  EXPECT_TRUE(rep.cap_reached);
  for (Index r : t.ranks()) EXPECT_LE(r, 2);
  EXPECT_LE((to_full(t).vec() - to_full(a).vec()).norm(), rep.discarded * (1 + 1e-10));
}

TEST_P(BothTrees, SpectraMatchDenseSvd) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(12);
  DenseTensor a = DenseTensor::random(tree.mode_sizes(), rng);
  HTensor h = from_full(a, tree, 0.0, 100000);
  const auto dense = dense_spectra(a, tree);
  for (const auto& s : node_spectra(h)) {
    const Vec& want = dense[s.node];
    const Index n = std::min(want.size(), s.sigma.size());
    EXPECT_LE((s.sigma.head(n) - want.head(n)).cwiseAbs().maxCoeff(), 1e-10 * want(0)) << s.label;
    for (Index i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma(i - 1), s.sigma(i));
    EXPECT_GT(s.sigma(n - 1), 0.0);
  }
}

TEST_P(BothTrees, LeafOperatorCommutesWithModeProduct) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(13);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  const DenseTensor full = to_full(a);
  // identity
  const int lx = tree.leaf_of(0);
  const Index n = tree.node_size(lx);
  EXPECT_EQ(rel_diff(to_full(apply_leaf_operator(a, lx, Mat(Mat::Identity(n, n)))), full), 0.0);
  // theta leaf random matrix
  const int lt = tree.leaf_of(2);
  Mat m = Mat::Random(tree.node_size(lt), tree.node_size(lt));
  EXPECT_LE(rel_diff(to_full(apply_leaf_operator(a, lt, m)), mode_product(full, 2, m)), 1e-12);
  // spatial leaf
  Mat ms = Mat::Random(n, n);
  DenseTensor want;
  if (GetParam() == TreeKind::split) {
    want = mode_product(full, 0, ms);
  } else {
    // {x,y} leaf acts on the combined (x,y) index
    const auto& s = tree.mode_sizes();
    DenseTensor merged({s[0] * s[1], s[2], s[3]}, full.values());
    DenseTensor prod = mode_product(merged, 0, ms);
    want = DenseTensor(s, prod.values());
  }
  EXPECT_LE(rel_diff(to_full(apply_leaf_operator(a, lx, ms)), want), 1e-12);
  EXPECT_THROW(apply_leaf_operator(a, 0, ms), std::out_of_range);
  EXPECT_THROW(apply_leaf_operator(a, lt, Mat(Mat::Identity(n + 1, n + 1))), std::invalid_argument);
}

TEST(HTensor, LeafOperatorOnRankOneFactor) {
  auto tree = DimensionTree::split(7, 6, 4, 2);
  std::mt19937_64 rng(14);
  std::vector<Vec> f{random_vector(7, rng), random_vector(6, rng), random_vector(4, rng), random_vector(2, rng)};
  HTensor h = from_full(outer(f), tree, 1e-12);
  Mat d = Mat::Random(7, 7);
  HTensor out = apply_leaf_operator(h, tree.leaf_of(0), d);
  for (Index r : out.ranks()) EXPECT_EQ(r, 1);
  auto g = f;
  g[0] = d * f[0];
  EXPECT_LE(rel_diff(to_full(out), outer(g)), 1e-12);
}

TEST_P(BothTrees, ContractAngularMatchesLoop) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(15);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  const auto& s = tree.mode_sizes();
  Vec wt = random_vector(s[2], rng).cwiseAbs(), wm = random_vector(s[3], rng).cwiseAbs();
  Mat factor = Mat::Random(s[2], s[3]);
  const DenseTensor full = to_full(a);
  Mat want = Mat::Zero(s[0], s[1]), want_f = Mat::Zero(s[0], s[1]);
  for (Index l = 0; l < s[3]; ++l)
    for (Index k = 0; k < s[2]; ++k)
      for (Index j = 0; j < s[1]; ++j)
        for (Index i = 0; i < s[0]; ++i) {
          const double w = wt(k) * wm(l) / (4 * std::numbers::pi);
          want(i, j) += w * full(i, j, k, l);
          want_f(i, j) += w * factor(k, l) * full(i, j, k, l);
        }
  SpatialField plain = contract_angular(a, wt, wm);
  SpatialField weighted = contract_angular(a, wt, wm, &factor);
  EXPECT_EQ(std::holds_alternative<HTensor>(plain.value), GetParam() == TreeKind::split);
  EXPECT_LE((plain.dense() - want).norm(), 1e-12 * want.norm());
  EXPECT_LE((weighted.dense() - want_f).norm(), 1e-12 * want_f.norm());
  EXPECT_THROW(contract_angular(a, random_vector(s[2] + 1, rng), wm), std::invalid_argument);
}

TEST_P(BothTrees, ContractAngularOfSeparable) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(16);
  const auto& s = tree.mode_sizes();
  Mat h = Mat::Random(s[0], s[1]);
  Vec st = random_vector(s[2], rng), tm = random_vector(s[3], rng);
  Vec wt = Vec::Constant(s[2], 0.5), wm = Vec::Constant(s[3], 2.0);
  HTensor g = separable(tree, {h}, st, tm);
  const double c = wt.dot(st) * wm.dot(tm) / (4 * std::numbers::pi);
  EXPECT_LE((contract_angular(g, wt, wm).dense() - c * h).norm(), 1e-12 * std::abs(c) * h.norm());
}

TEST_P(BothTrees, HadamardRankOneIsExact) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(17);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 1), rng);
  HTensor b = random_htensor(tree, uniform_ranks(tree, 1), rng);
  HTensor p = hadamard(a, b, 1e-12);
  for (Index r : p.ranks()) EXPECT_EQ(r, 1);
  EXPECT_LE(rel_diff(to_full(p), hadamard(to_full(a), to_full(b))), 1e-12);
}

TEST_P(BothTrees, HadamardWithOnes) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(18);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  const auto& s = tree.mode_sizes();
  HTensor ones = separable(tree, {Mat(Mat::Ones(s[0], s[1]))}, Vec::Ones(s[2]), Vec::Ones(s[3]));
  EXPECT_LE(rel_diff(to_full(hadamard(a, ones, 1e-10)), to_full(a)), 1e-10);
}

TEST_P(BothTrees, HadamardRandomRankThree) {
  auto tree = GetParam() == TreeKind::unsplit ? DimensionTree::unsplit(16, 16, 8, 8)
                                              : DimensionTree::split(16, 16, 8, 8);
  std::mt19937_64 rng(19);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  HTensor b = random_htensor(tree, uniform_ranks(tree, 3), rng);
  EXPECT_LE(rel_diff(to_full(hadamard(a, b, 1e-10)), hadamard(to_full(a), to_full(b))), 1e-8);
}

TEST_P(BothTrees, MultiplySpatialMatchesDense) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(20);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 3), rng);
  const auto& s = tree.mode_sizes();
  Mat sigma = Mat::Random(s[0], s[1]);
  HTensor field = separable(tree, {sigma}, Vec::Ones(s[2]), Vec::Ones(s[3]));
  const DenseTensor want = hadamard(to_full(a), to_full(field));
  EXPECT_LE(rel_diff(to_full(multiply_spatial(a, sigma)), want), 1e-12);
  EXPECT_LE(rel_diff(to_full(multiply_spatial(a, Mat(Mat::Ones(s[0], s[1])))), to_full(a)), 1e-12);
}

TEST_P(BothTrees, LeafMeanSquareMatchesDense) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(21);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  const DenseTensor full = to_full(a);
  const int leaf = tree.leaf_of(0);
  Vec e = leaf_mean_square(a, leaf);
  const auto& s = tree.mode_sizes();
  Vec want = Vec::Zero(e.size());
  for (Index l = 0; l < s[3]; ++l)
    for (Index k = 0; k < s[2]; ++k)
      for (Index j = 0; j < s[1]; ++j)
        for (Index i = 0; i < s[0]; ++i) {
          const Index row = GetParam() == TreeKind::split ? i : i + s[0] * j;
          want(row) += full(i, j, k, l) * full(i, j, k, l);
        }
  want /= static_cast<double>(full.size() / e.size());
  EXPECT_LE((e - want).norm(), 1e-12 * want.norm());
}

TEST_P(BothTrees, LeafGramFactorReproducesGram) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(22);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  const DenseTensor full = to_full(a);
  for (int dim = 0; dim < 4; ++dim) {
    const int leaf = tree.leaf_of(dim);
    if (leaf < 0) continue;
    const Mat m = matricize(full, tree.node(leaf).dims);
    const Mat v = leaf_gram_factor(a, leaf);
    EXPECT_EQ(v.rows(), m.rows());
    EXPECT_LE((v * v.transpose() - m * m.transpose()).norm(), 1e-11 * m.squaredNorm());
  }
}

TEST(HTensor, NdofsCounts) {
  auto tree = DimensionTree::split(16, 16, 16, 16);
  std::mt19937_64 rng(22);
  EXPECT_EQ(ndofs(random_htensor(tree, uniform_ranks(tree, 1), rng)), 67);
  for (Index r : {2, 3, 5}) {
    EXPECT_EQ(ndofs(random_htensor(tree, uniform_ranks(tree, r), rng)), 4 * 16 * r + 2 * r * r * r + r * r);
  }
}

TEST_P(BothTrees, SerializationRoundTrip) {
  auto tree = small_tree(GetParam());
  std::mt19937_64 rng(23);
  HTensor a = random_htensor(tree, uniform_ranks(tree, 2), rng);
  std::stringstream ss;
  save_htensor(a, ss);
  HTensor b = load_htensor(ss);
  EXPECT_TRUE(b.tree() == a.tree());
  EXPECT_EQ(b.ranks(), a.ranks());
  for (int t = 0; t < tree.size(); ++t) EXPECT_EQ(b.frame(t), a.frame(t));
  std::stringstream bad("not a tensor file at all");
  EXPECT_THROW(load_htensor(bad), std::runtime_error);
}

TEST_P(BothTrees, CompressSpatialAndSeparableSplit) {
  auto tree = small_tree(GetParam());
  const auto& s = tree.mode_sizes();
  Mat f(s[0], s[1]);
  for (Index j = 0; j < s[1]; ++j)
    for (Index i = 0; i < s[0]; ++i) f(i, j) = std::sin(0.3 * i) * std::cos(0.7 * j) + 0.1 * i * j;
  HTensor h = compress_spatial(f, 1e-14);
  EXPECT_EQ(h.rank(1), 2);
  EXPECT_LE((SpatialField{h}.dense() - f).norm(), 1e-13 * f.norm());
}

// Property: the truncation error never exceeds the root-sum-square of the
// discarded singular values of the untruncated tensor.
TEST(TruncationProperty, BoundHoldsOnRandomTensors) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> rank_dist(1, 6);
  int checked = 0;
  for (TreeKind kind : {TreeKind::unsplit, TreeKind::split}) {
    auto tree = kind == TreeKind::unsplit ? DimensionTree::unsplit(8, 7, 6, 4) : DimensionTree::split(8, 7, 6, 4);
    for (int rep = 0; rep < 60; ++rep) {
      std::vector<Index> ranks(tree.size());
      for (auto& r : ranks) r = rank_dist(rng);
      HTensor a = random_htensor(tree, ranks, rng);
      // add a decaying tail so that several tolerances discard something
      HTensor tail = scale(random_htensor(tree, uniform_ranks(tree, 3), rng), std::pow(10.0, -1 - rep % 5));
      a = add(a, tail);
      const DenseTensor full = to_full(a);
      const auto spectra = dense_spectra(full, tree);
      for (double tol : {1e-2, 1e-4, 1e-6}) {
        HTensor t = truncate(a, tol);
        const double err = (to_full(t).vec() - full.vec()).norm();
        EXPECT_LE(err, discarded_bound(spectra, t.ranks()) * (1 + 1e-9) + 1e-14 * full.norm());
        for (Index r : t.ranks()) EXPECT_GE(r, 1);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 360);
}

INSTANTIATE_TEST_SUITE_P(Trees, BothTrees, ::testing::Values(TreeKind::unsplit, TreeKind::split),
                         [](const auto& info) { return info.param == TreeKind::unsplit ? "unsplit" : "split"; });

}  // namespace
}  // namespace lrt
