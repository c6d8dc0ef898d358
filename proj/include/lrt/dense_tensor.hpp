#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace lrt {

using Index = Eigen::Index;

// Dense d-way array, first index fastest (column-major generalization).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> shape, double fill = 0.0);
  DenseTensor(std::vector<Index> shape, std::vector<double> data);

  const std::vector<Index>& shape() const { return shape_; }
  Index dim(std::size_t k) const { return shape_[k]; }
  std::size_t order() const { return shape_.size(); }
  Index size() const { return static_cast<Index>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  Index linear_index(std::span<const Index> idx) const;
  double& at(std::span<const Index> idx) { return data_[linear_index(idx)]; }
  double at(std::span<const Index> idx) const { return data_[linear_index(idx)]; }
  double& operator()(Index i, Index j, Index k, Index l);
  double operator()(Index i, Index j, Index k, Index l) const;

  double norm() const;
  Eigen::Map<Eigen::VectorXd> vec() { return {data_.data(), size()}; }
  Eigen::Map<const Eigen::VectorXd> vec() const { return {data_.data(), size()}; }

  static DenseTensor random(std::vector<Index> shape, std::mt19937_64& rng);

 private:
  std::vector<Index> shape_;
  std::vector<double> data_;
};

// Rows are the listed dims (first fastest), columns the remaining dims in
// increasing order (first fastest).
Eigen::MatrixXd matricize(const DenseTensor& a, std::span<const int> row_dims);

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator-(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double c, const DenseTensor& a);
DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

// Mode product along one dim: result(..., i, ...) = sum_j m(i, j) a(..., j, ...).
DenseTensor mode_product(const DenseTensor& a, int dim, const Eigen::MatrixXd& m);

// Outer product of vectors (first vector fastest).
DenseTensor outer(const std::vector<Eigen::VectorXd>& factors);

}  // namespace lrt
