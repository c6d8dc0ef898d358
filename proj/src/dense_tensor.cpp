#include "lrt/dense_tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace lrt {

namespace {

Index product(const std::vector<Index>& s) {
  return std::accumulate(s.begin(), s.end(), Index{1}, std::multiplies<>());
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("dense tensor shape mismatch");
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> shape, double fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(product(shape_)), fill) {}

DenseTensor::DenseTensor(std::vector<Index> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<Index>(data_.size()) != product(shape_))
    throw std::invalid_argument("dense tensor data size does not match shape");
}

Index DenseTensor::linear_index(std::span<const Index> idx) const {
  Index lin = 0;
  Index stride = 1;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    lin += idx[k] * stride;
    stride *= shape_[k];
  }
  return lin;
}

double& DenseTensor::operator()(Index i, Index j, Index k, Index l) {
  return data_[i + shape_[0] * (j + shape_[1] * (k + shape_[2] * l))];
}

double DenseTensor::operator()(Index i, Index j, Index k, Index l) const {
  return data_[i + shape_[0] * (j + shape_[1] * (k + shape_[2] * l))];
}

double DenseTensor::norm() const { return vec().norm(); }

DenseTensor DenseTensor::random(std::vector<Index> shape, std::mt19937_64& rng) {
  DenseTensor t(std::move(shape));
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : t.data_) v = nd(rng);
  return t;
}

Eigen::MatrixXd matricize(const DenseTensor& a, std::span<const int> row_dims) {
  const auto d = static_cast<int>(a.order());
  std::vector<int> rows(row_dims.begin(), row_dims.end());
  std::vector<int> cols;
  for (int k = 0; k < d; ++k)
    if (std::find(rows.begin(), rows.end(), k) == rows.end()) cols.push_back(k);
  Index nr = 1, nc = 1;
  for (int k : rows) nr *= a.dim(k);
  for (int k : cols) nc *= a.dim(k);
  // strides of each dim in the source layout
  std::vector<Index> stride(d);
  Index s = 1;
  for (int k = 0; k < d; ++k) {
    stride[k] = s;
    s *= a.dim(k);
  }
  std::vector<Index> row_off(nr), col_off(nc);
  auto offsets = [&](const std::vector<int>& dims, std::vector<Index>& out) {
    std::vector<Index> idx(dims.size(), 0);
    for (std::size_t n = 0; n < out.size(); ++n) {
      Index off = 0;
      for (std::size_t q = 0; q < dims.size(); ++q) off += idx[q] * stride[dims[q]];
      out[n] = off;
      for (std::size_t q = 0; q < dims.size(); ++q) {
        if (++idx[q] < a.dim(dims[q])) break;
        idx[q] = 0;
      }
    }
  };
  offsets(rows, row_off);
  offsets(cols, col_off);
  Eigen::MatrixXd m(nr, nc);
  const double* p = a.data();
  for (Index j = 0; j < nc; ++j)
    for (Index i = 0; i < nr; ++i) m(i, j) = p[row_off[i] + col_off[j]];
  return m;
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b);
  DenseTensor r = a;
  r.vec() += b.vec();
  return r;
}

DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b);
  DenseTensor r = a;
  r.vec() -= b.vec();
  return r;
}

DenseTensor operator*(double c, const DenseTensor& a) {
  DenseTensor r = a;
  r.vec() *= c;
  return r;
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
  require_same_shape(a, b);
  DenseTensor r = a;
  r.vec().array() *= b.vec().array();
  return r;
}

DenseTensor mode_product(const DenseTensor& a, int dim, const Eigen::MatrixXd& m) {
  if (m.cols() != a.dim(dim)) throw std::invalid_argument("mode product dimension mismatch");
  Index inner = 1, outer_n = 1;
  for (int k = 0; k < dim; ++k) inner *= a.dim(k);
  for (std::size_t k = dim + 1; k < a.order(); ++k) outer_n *= a.dim(k);
  auto shape = a.shape();
  shape[dim] = m.rows();
  DenseTensor r(shape);
  const Index n_in = a.dim(dim), n_out = m.rows();
  for (Index o = 0; o < outer_n; ++o) {
    Eigen::Map<const Eigen::MatrixXd> src(a.data() + o * inner * n_in, inner, n_in);
    Eigen::Map<Eigen::MatrixXd> dst(r.data() + o * inner * n_out, inner, n_out);
    dst.noalias() = src * m.transpose();
  }
  return r;
}

DenseTensor outer(const std::vector<Eigen::VectorXd>& factors) {
  std::vector<Index> shape;
  for (const auto& f : factors) shape.push_back(f.size());
  DenseTensor r(shape, 1.0);
  Index inner = 1;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Index n = factors[k].size();
    for (Index lin = 0; lin < r.size(); ++lin) r.data()[lin] *= factors[k]((lin / inner) % n);
    inner *= n;
  }
  return r;
}

}  // namespace lrt
