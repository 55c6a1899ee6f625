#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/StdVector>

namespace hmn::num {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of rank 1 or 2.
template <typename T>
class Array {
 public:
  using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  Array() = default;
  explicit Array(Shape shape, T fill = T(0));
  Array(Shape shape, std::vector<T> data);

  static Array vector(std::initializer_list<T> values);
  static Array matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() == 2 ? shape_[1] : 1; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  MatrixMap mat() { return MatrixMap(data_.data(), rows(), cols()); }
  ConstMatrixMap mat() const { return ConstMatrixMap(data_.data(), rows(), cols()); }
  VectorMap vec() { return VectorMap(data_.data(), data_.size()); }
  ConstVectorMap vec() const { return ConstVectorMap(data_.data(), data_.size()); }

  void set_zero();
  bool all_finite() const;

  template <typename U>
  Array<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Array<U>(shape_, std::move(out));
  }

  friend bool operator==(const Array&, const Array&) = default;

 private:
  Shape shape_;
  // Aligned storage keeps Eigen's vectorized reductions on the same code
  // path for every buffer, so summation order (and results) never depend on
  // where the allocator happened to place the data.
  std::vector<T, Eigen::aligned_allocator<T>> data_;
};

extern template class Array<float>;
extern template class Array<double>;
extern template class Array<long double>;

}  // namespace hmn::num
