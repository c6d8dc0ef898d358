#include "lrt/stencil.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace lrt {
namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
constexpr double kPi = std::numbers::pi;

Vec sample(Eigen::Index n, double (*f)(double)) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = f(static_cast<double>(i) / n);
  return v;
}

double sin2pi(double x) { return std::sin(2 * kPi * x); }
double dsin2pi(double x) { return 2 * kPi * std::cos(2 * kPi * x); }

struct Errors {
  double max;
  double l1;
};

Errors sin_errors(Eigen::Index n, Bias bias, Scheme scheme) {
  DerivativeOperator op(n, 1.0 / n, bias, scheme);
  Vec d = op.apply(sample(n, sin2pi)) - sample(n, dsin2pi);
  return {d.cwiseAbs().maxCoeff(), d.cwiseAbs().sum() / n};
}

TEST(Stencil, AnnihilatesConstants) {
  for (Scheme s : {Scheme::weno5, Scheme::muscl2})
    for (Bias b : {Bias::minus, Bias::plus}) {
      DerivativeOperator op(32, 0.1, b, s);
      EXPECT_LE(op.apply(Vec::Constant(32, 3.7)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Stencil, RejectsSmallGrids) {
  EXPECT_THROW(DerivativeOperator(6, 0.1, Bias::minus, Scheme::weno5), std::invalid_argument);
  EXPECT_NO_THROW(DerivativeOperator(7, 0.1, Bias::minus, Scheme::weno5));
  EXPECT_THROW(DerivativeOperator(2, 0.1, Bias::minus, Scheme::muscl2), std::invalid_argument);
  EXPECT_NO_THROW(DerivativeOperator(3, 0.1, Bias::plus, Scheme::muscl2));
}

TEST(Stencil, WenoRefinementRatio) {
  for (Bias b : {Bias::minus, Bias::plus}) {
    const double ratio = sin_errors(64, b, Scheme::weno5).max / sin_errors(128, b, Scheme::weno5).max;
    EXPECT_GE(ratio, 24.0);
    EXPECT_LE(ratio, 40.0);
  }
}

TEST(Stencil, ObservedOrders) {
  for (Bias b : {Bias::minus, Bias::plus}) {
    for (Eigen::Index n : {32, 64, 128}) {
      const double weno = std::log2(sin_errors(n, b, Scheme::weno5).max / sin_errors(2 * n, b, Scheme::weno5).max);
      EXPECT_NEAR(weno, 5.0, 0.5) << n;
      // The minmod limiter clips to first order at the two extrema of the
      // sine, so the second-order rate is measured in the mean (L1) norm.
      const double muscl = std::log2(sin_errors(n, b, Scheme::muscl2).l1 / sin_errors(2 * n, b, Scheme::muscl2).l1);
      EXPECT_NEAR(muscl, 2.0, 0.5) << n;
    }
  }
}

TEST(Stencil, MusclReproducesLinearSlope) {
  const Eigen::Index n = 20;
  const double h = 0.5;
  Vec f(n);
  for (Eigen::Index i = 0; i < n; ++i) f(i) = 3.0 * i;
  for (Bias b : {Bias::minus, Bias::plus}) {
    Vec d = DerivativeOperator(n, h, b, Scheme::muscl2).apply(f);
    for (Eigen::Index i = 3; i < n - 3; ++i) EXPECT_NEAR(d(i), 3.0 / h, 1e-12) << i;
  }
}

TEST(Stencil, ReflectionSymmetry) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (Scheme s : {Scheme::weno5, Scheme::muscl2}) {
    const Eigen::Index n = 40;
    auto [dm, dp] = build_pair(n, 0.05, s);
    Vec f(n);
    for (auto& v : f) v = nd(rng);
    Vec rev = f.reverse();
    Vec lhs = dp.apply(rev);
    Vec rhs = -dm.apply(f).reverse();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST(Stencil, TelescopingConservation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (Scheme s : {Scheme::weno5, Scheme::muscl2})
    for (Bias b : {Bias::minus, Bias::plus}) {
      const Eigen::Index n = 64;
      Vec f(n);
      for (auto& v : f) v = nd(rng);
      EXPECT_LE(std::abs(DerivativeOperator(n, 1.0, b, s).apply(f).sum()), 1e-12 * n);
    }
}

TEST(Stencil, WenoStepReconstructionStaysInRange) {
  // unit step: reconstructed interface values must not leave [0, 1]
  const Eigen::Index n = 32;
  Vec f = Vec::Zero(n);
  f.segment(8, 12).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::array<double, 5> v;
    for (int m = 0; m < 5; ++m) v[m] = f((i - 2 + m + n) % n);
    const auto c = DerivativeOperator::interface_weights(Scheme::weno5, v);
    double r = 0.0;
    for (int m = 0; m < 5; ++m) r += c[m] * v[m];
    EXPECT_GE(r, -1e-10);
    EXPECT_LE(r, 1.0 + 1e-10);
  }
}

TEST(Stencil, BiasedPairAgreeOnSmoothData) {
  auto gauss = [](double x) { return std::exp(-150.0 * (x - 0.5) * (x - 0.5)); };
  double prev = 0.0;
  for (Eigen::Index n : {64, 128, 256}) {
    auto [dm, dp] = build_pair(n, 1.0 / n, Scheme::weno5);
    Vec f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = gauss(static_cast<double>(i) / n);
    const double diff = (dm.apply(f) - dp.apply(f)).cwiseAbs().maxCoeff();
    if (prev > 0.0) {
      EXPECT_GT(std::log2(prev / diff), 4.0);
    }
    prev = diff;
  }
}

TEST(Stencil, FrozenOperatorIsLinearAndConsistent) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const Eigen::Index n = 24;
  Vec ind(n), a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ind(i) = nd(rng);
    a(i) = nd(rng);
    b(i) = nd(rng);
  }
  for (Scheme s : {Scheme::weno5, Scheme::muscl2})
    for (Bias bias : {Bias::minus, Bias::plus}) {
      DerivativeOperator op(n, 0.3, bias, s);
      FrozenStencil fz = op.freeze(ind);
      EXPECT_LE((fz.apply(Vec(2.0 * a - b)) - (2.0 * fz.apply(a) - fz.apply(b))).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_EQ(op.freeze(ind).apply(ind), op.apply(ind));
      EXPECT_LE((fz.matrix() * a - fz.apply(a)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Stencil, FieldDerivativeMatchesLines) {
  std::mt19937_64 rng(4);
  const Eigen::Index nx = 9, ny = 11;
  Mat f = Mat::Random(nx, ny), g = Mat::Random(nx, ny);
  DerivativeOperator opx(nx, 0.2, Bias::minus, Scheme::weno5);
  DerivativeOperator opy(ny, 0.3, Bias::plus, Scheme::weno5);
  Mat dx = derivative(opx, Axis::x, f);
  Mat dy = derivative(opy, Axis::y, f);
  for (Eigen::Index j = 0; j < ny; ++j) EXPECT_LE((dx.col(j) - opx.apply(f.col(j))).norm(), 1e-14);
  for (Eigen::Index i = 0; i < nx; ++i)
    EXPECT_LE((dy.row(i).transpose() - opy.apply(f.row(i).transpose())).norm(), 1e-14);
  // frozen on f, applied to g, flat and matrix paths agree
  FieldDerivative fd(opy, Axis::y, f);
  Mat flat(nx * ny, 2);
  flat.col(0) = Eigen::Map<const Vec>(g.data(), g.size());
  flat.col(1) = Eigen::Map<const Vec>(f.data(), f.size());
  Mat out = fd.apply_flat(flat);
  Mat dg = fd.apply(g);
  EXPECT_LE((out.col(0) - Eigen::Map<const Vec>(dg.data(), dg.size())).norm(), 1e-14);
  EXPECT_LE((out.col(1) - Eigen::Map<const Vec>(dy.data(), dy.size())).norm(), 1e-14);
  // shared profile applies the same stencil on every line
  Vec prof = f.col(0);
  FieldDerivative shared(opx, Axis::x, prof, ny);
  Mat ds = shared.apply(g);
  FrozenStencil one = opx.freeze(prof);
  for (Eigen::Index j = 0; j < ny; ++j) EXPECT_LE((ds.col(j) - one.apply(Vec(g.col(j)))).norm(), 1e-14);
}

TEST(Stencil, MomentWeightsMatchVectorWeights) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 5> v;
    Eigen::Matrix<double, 5, 1> col;
    for (int m = 0; m < 5; ++m) col(m) = v[m] = nd(rng) * std::pow(10.0, trial % 5 - 3);
    const Moment5 mom = col * col.transpose();
    for (Scheme s : {Scheme::weno5, Scheme::muscl2}) {
      const auto a = DerivativeOperator::interface_weights(s, v);
      const auto b = DerivativeOperator::interface_weights(s, mom);
      for (int m = 0; m < 5; ++m) EXPECT_NEAR(a[m], b[m], 1e-12);
    }
  }
}

TEST(Stencil, EnsembleOfOneColumnIsClassical) {
  const Eigen::Index nx = 12, ny = 10;
  Mat f = Mat::Random(nx, ny);
  const Mat col = Eigen::Map<const Mat>(f.data(), f.size(), 1);
  for (Bias bias : {Bias::minus, Bias::plus}) {
    DerivativeOperator opx(nx, 0.1, bias, Scheme::weno5), opy(ny, 0.1, bias, Scheme::weno5);
    EXPECT_LE((FieldDerivative::ensemble(opx, Axis::x, col, nx, ny, 1.0).apply(f) - derivative(opx, Axis::x, f))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_LE((FieldDerivative::ensemble(opy, Axis::y, col, nx, ny, 1.0).apply(f) - derivative(opy, Axis::y, f))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Stencil, EnsembleIgnoresRotationsOfTheFactor) {
  // weights depend on V V^T only: V Q for orthogonal Q gives the same stencil
  const Eigen::Index n = 16;
  Mat v = Mat::Random(n, 3);
  Eigen::HouseholderQR<Mat> qr(Mat::Random(3, 3));
  const Mat q = qr.householderQ();
  DerivativeOperator op(n, 1.0 / n, Bias::minus, Scheme::weno5);
  const Mat probe = Mat::Random(n, 2);
  const Mat a = op.freeze_ensemble(v, 0, 1, 0.7).apply_columns(probe);
  const Mat b = op.freeze_ensemble(Mat(v * q), 0, 1, 0.7).apply_columns(probe);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Stencil, EnsembleScaleInvariance) {
  // scale = 1/||V||^2 makes the stencil independent of the amplitude of V
  const Eigen::Index n = 20;
  Mat v(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i, 0) = std::sin(2 * kPi * i / n) + (i > n / 2 ? 1.0 : 0.0);
    v(i, 1) = std::cos(4 * kPi * i / n);
  }
  DerivativeOperator op(n, 1.0 / n, Bias::plus, Scheme::weno5);
  const Mat probe = Mat::Random(n, 1);
  const Mat a = op.freeze_ensemble(v, 0, 1, 1.0 / v.squaredNorm()).apply_columns(probe);
  const Mat w = 1e3 * v;
  const Mat b = op.freeze_ensemble(w, 0, 1, 1.0 / w.squaredNorm()).apply_columns(probe);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace
}  // namespace lrt
