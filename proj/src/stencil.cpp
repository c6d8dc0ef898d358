#include "lrt/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace lrt {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

constexpr double kWenoEps = 1e-6;

inline Index wrap(Index i, Index n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

FrozenStencil::FrozenStencil(Index n, double h, Bias bias, std::vector<std::array<double, 5>> coeffs)
    : n_(n), h_(h), offset_(bias == Bias::minus ? -2 : -1), coeffs_(std::move(coeffs)) {
  if (static_cast<Index>(coeffs_.size()) != n) throw std::invalid_argument("stencil coefficient count mismatch");
}

void FrozenStencil::apply(const double* in, Index si, double* out, Index so) const {
  // flux at i+1/2 for i = -1 .. n-1; flux[-1] is the periodic image of flux[n-1]
  thread_local std::vector<double> flux;
  flux.resize(n_);
  for (Index i = 0; i < n_; ++i) {
    const auto& c = coeffs_[i];
    double s = 0.0;
    const Index base = i + offset_;
    if (base >= 0 && base + 4 < n_) {
      const double* p = in + base * si;
      s = c[0] * p[0] + c[1] * p[si] + c[2] * p[2 * si] + c[3] * p[3 * si] + c[4] * p[4 * si];
    } else {
      for (int m = 0; m < 5; ++m) s += c[m] * in[wrap(base + m, n_) * si];
    }
    flux[i] = s;
  }
  const double inv = 1.0 / h_;
  out[0] = (flux[0] - flux[n_ - 1]) * inv;
  for (Index i = 1; i < n_; ++i) out[i * so] = (flux[i] - flux[i - 1]) * inv;
}

Vec FrozenStencil::apply(const Vec& f) const {
  if (f.size() != n_) throw std::invalid_argument("column length mismatch");
  Vec out(n_);
  apply(f.data(), 1, out.data(), 1);
  return out;
}

Mat FrozenStencil::apply_columns(const Mat& cols) const {
  if (cols.rows() != n_) throw std::invalid_argument("column length mismatch");
  Mat out(n_, cols.cols());
  for (Index c = 0; c < cols.cols(); ++c) apply(cols.col(c).data(), 1, out.col(c).data(), 1);
  return out;
}

Mat FrozenStencil::matrix() const {
  Mat m(n_, n_);
  Vec e = Vec::Zero(n_);
  for (Index j = 0; j < n_; ++j) {
    e(j) = 1.0;
    m.col(j) = apply(e);
    e(j) = 0.0;
  }
  return m;
}

DerivativeOperator::DerivativeOperator(Index n, double h, Bias bias, Scheme scheme)
    : n_(n), h_(h), bias_(bias), scheme_(scheme) {
  const Index min_n = scheme == Scheme::weno5 ? 7 : 3;
  if (n < min_n) throw std::invalid_argument("grid too small for the stencil width");
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
}

std::array<double, 5> DerivativeOperator::interface_weights(Scheme scheme, const std::array<double, 5>& v) {
  if (scheme == Scheme::muscl2) {
    const double a = v[2] - v[1], b = v[3] - v[2];
    if (a * b <= 0.0) return {0.0, 0.0, 1.0, 0.0, 0.0};
    if (std::abs(a) <= std::abs(b)) return {0.0, -0.5, 1.5, 0.0, 0.0};
    return {0.0, 0.0, 0.5, 0.5, 0.0};
  }
  const double b0 = 13.0 / 12.0 * std::pow(v[0] - 2 * v[1] + v[2], 2) + 0.25 * std::pow(v[0] - 4 * v[1] + 3 * v[2], 2);
  const double b1 = 13.0 / 12.0 * std::pow(v[1] - 2 * v[2] + v[3], 2) + 0.25 * std::pow(v[1] - v[3], 2);
  const double b2 = 13.0 / 12.0 * std::pow(v[2] - 2 * v[3] + v[4], 2) + 0.25 * std::pow(3 * v[2] - 4 * v[3] + v[4], 2);
  const double a0 = 0.1 / ((kWenoEps + b0) * (kWenoEps + b0));
  const double a1 = 0.6 / ((kWenoEps + b1) * (kWenoEps + b1));
  const double a2 = 0.3 / ((kWenoEps + b2) * (kWenoEps + b2));
  const double s = a0 + a1 + a2;
  const double w0 = a0 / s, w1 = a1 / s, w2 = a2 / s;
  return {w0 * (2.0 / 6.0), w0 * (-7.0 / 6.0) + w1 * (-1.0 / 6.0),
          w0 * (11.0 / 6.0) + w1 * (5.0 / 6.0) + w2 * (2.0 / 6.0), w1 * (2.0 / 6.0) + w2 * (5.0 / 6.0),
          w2 * (-1.0 / 6.0)};
}

FrozenStencil DerivativeOperator::freeze(const double* ind, Index stride) const {
  std::vector<std::array<double, 5>> coeffs(n_);
  for (Index i = 0; i < n_; ++i) {
    std::array<double, 5> v;
    if (bias_ == Bias::minus) {
      for (int m = 0; m < 5; ++m) v[m] = ind[wrap(i - 2 + m, n_) * stride];
      coeffs[i] = interface_weights(scheme_, v);
    } else {
      // mirrored stencil: v = (f_{i+3}, f_{i+2}, f_{i+1}, f_i, f_{i-1})
      for (int m = 0; m < 5; ++m) v[m] = ind[wrap(i + 3 - m, n_) * stride];
      const auto g = interface_weights(scheme_, v);
      for (int m = 0; m < 5; ++m) coeffs[i][m] = g[4 - m];
    }
  }
  return FrozenStencil(n_, h_, bias_, std::move(coeffs));
}

std::array<double, 5> DerivativeOperator::interface_weights(Scheme scheme, const Moment5& m) {
  using R5 = Eigen::Matrix<double, 1, 5>;
  auto q = [&m](const R5& a) -> double { return (a * m * a.transpose())(0, 0); };
  if (scheme == Scheme::muscl2) {
    const R5 da(0, -1, 1, 0, 0), db(0, 0, -1, 1, 0);
    const double ab = (da * m * db.transpose())(0, 0);
    if (ab <= 0.0) return {0.0, 0.0, 1.0, 0.0, 0.0};
    if (q(da) <= q(db)) return {0.0, -0.5, 1.5, 0.0, 0.0};
    return {0.0, 0.0, 0.5, 0.5, 0.0};
  }
  const double b0 = 13.0 / 12.0 * q(R5(1, -2, 1, 0, 0)) + 0.25 * q(R5(1, -4, 3, 0, 0));
  const double b1 = 13.0 / 12.0 * q(R5(0, 1, -2, 1, 0)) + 0.25 * q(R5(0, 1, 0, -1, 0));
  const double b2 = 13.0 / 12.0 * q(R5(0, 0, 1, -2, 1)) + 0.25 * q(R5(0, 0, 3, -4, 1));
  const double a0 = 0.1 / ((kWenoEps + b0) * (kWenoEps + b0));
  const double a1 = 0.6 / ((kWenoEps + b1) * (kWenoEps + b1));
  const double a2 = 0.3 / ((kWenoEps + b2) * (kWenoEps + b2));
  const double s = a0 + a1 + a2;
  const double w0 = a0 / s, w1 = a1 / s, w2 = a2 / s;
  return {w0 * (2.0 / 6.0), w0 * (-7.0 / 6.0) + w1 * (-1.0 / 6.0),
          w0 * (11.0 / 6.0) + w1 * (5.0 / 6.0) + w2 * (2.0 / 6.0), w1 * (2.0 / 6.0) + w2 * (5.0 / 6.0),
          w2 * (-1.0 / 6.0)};
}

FrozenStencil DerivativeOperator::freeze_ensemble(const Mat& factor, Index offset, Index stride,
                                                  double scale) const {
  std::vector<std::array<double, 5>> coeffs(n_);
  Mat w(5, factor.cols());
  for (Index i = 0; i < n_; ++i) {
    // window rows in increasing grid order
    const Index first = bias_ == Bias::minus ? i - 2 : i - 1;
    for (int m = 0; m < 5; ++m) {
      // mirrored order for the right-biased reconstruction
      const int row = bias_ == Bias::minus ? m : 4 - m;
      w.row(row) = factor.row(offset + wrap(first + m, n_) * stride);
    }
    const Moment5 mom = scale * (w * w.transpose());
    const auto g = interface_weights(scheme_, mom);
    if (bias_ == Bias::minus) {
      coeffs[i] = g;
    } else {
      for (int m = 0; m < 5; ++m) coeffs[i][m] = g[4 - m];
    }
  }
  return FrozenStencil(n_, h_, bias_, std::move(coeffs));
}

Vec DerivativeOperator::apply(const Vec& f) const {
  if (f.size() != n_) throw std::invalid_argument("column length mismatch");
  return freeze(f.data()).apply(f);
}

std::pair<DerivativeOperator, DerivativeOperator> build_pair(Index n, double h, Scheme scheme) {
  return {DerivativeOperator(n, h, Bias::minus, scheme), DerivativeOperator(n, h, Bias::plus, scheme)};
}

FieldDerivative::FieldDerivative(const DerivativeOperator& op, Axis axis, const Mat& indicator)
    : axis_(axis), nx_(indicator.rows()), ny_(indicator.cols()), shared_(false) {
  const Index along = axis == Axis::x ? nx_ : ny_;
  if (op.size() != along) throw std::invalid_argument("operator size does not match field");
  if (axis == Axis::x) {
    for (Index j = 0; j < ny_; ++j) lines_.push_back(op.freeze(indicator.col(j).data(), 1));
  } else {
    for (Index i = 0; i < nx_; ++i) lines_.push_back(op.freeze(indicator.data() + i, nx_));
  }
}

FieldDerivative::FieldDerivative(const DerivativeOperator& op, Axis axis, const Vec& profile, Index n_other)
    : axis_(axis), shared_(true) {
  if (op.size() != profile.size()) throw std::invalid_argument("operator size does not match profile");
  nx_ = axis == Axis::x ? profile.size() : n_other;
  ny_ = axis == Axis::x ? n_other : profile.size();
  lines_.push_back(op.freeze(profile));
}

FieldDerivative FieldDerivative::ensemble(const DerivativeOperator& op, Axis axis, const Mat& factor, Index nx,
                                          Index ny, double scale) {
  if (factor.rows() != nx * ny) throw std::invalid_argument("factor rows must match the flattened field");
  if (op.size() != (axis == Axis::x ? nx : ny)) throw std::invalid_argument("operator size does not match field");
  FieldDerivative f;
  f.axis_ = axis;
  f.nx_ = nx;
  f.ny_ = ny;
  f.shared_ = false;
  if (axis == Axis::x) {
    for (Index j = 0; j < ny; ++j) f.lines_.push_back(op.freeze_ensemble(factor, nx * j, 1, scale));
  } else {
    for (Index i = 0; i < nx; ++i) f.lines_.push_back(op.freeze_ensemble(factor, i, nx, scale));
  }
  return f;
}

void FieldDerivative::apply_one(const double* in, double* out) const {
  if (axis_ == Axis::x) {
    for (Index j = 0; j < ny_; ++j) line(j).apply(in + j * nx_, 1, out + j * nx_, 1);
  } else {
    for (Index i = 0; i < nx_; ++i) line(i).apply(in + i, nx_, out + i, nx_);
  }
}

Mat FieldDerivative::apply(const Mat& field) const {
  if (field.rows() != nx_ || field.cols() != ny_) throw std::invalid_argument("field shape mismatch");
  Mat out(nx_, ny_);
  apply_one(field.data(), out.data());
  return out;
}

Mat FieldDerivative::apply_flat(const Mat& columns) const {
  if (columns.rows() != nx_ * ny_) throw std::invalid_argument("flattened field length mismatch");
  Mat out(columns.rows(), columns.cols());
  for (Index c = 0; c < columns.cols(); ++c) apply_one(columns.col(c).data(), out.col(c).data());
  return out;
}

Mat derivative(const DerivativeOperator& op, Axis axis, const Mat& field) {
  return FieldDerivative(op, axis, field).apply(field);
}

}  // namespace lrt
