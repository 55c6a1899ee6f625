#include "hmn/numerics/array.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hmn/errors.hpp"

namespace hmn::num {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

std::size_t element_count(const Shape& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("array rank must be 1 or 2, got shape " + shape_string(shape));
  }
  for (auto d : shape) {
    if (d == 0) throw DimensionError("array dimensions must be positive: " + shape_string(shape));
  }
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

template <typename T>
Array<T>::Array(Shape shape, T fill) : shape_(std::move(shape)) {
  data_.assign(element_count(shape_), fill);
}

template <typename T>
Array<T>::Array(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (element_count(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
  }
}

template <typename T>
Array<T> Array<T>::vector(std::initializer_list<T> values) {
  return Array({values.size()}, std::vector<T>(values));
}

template <typename T>
Array<T> Array<T>::matrix(std::size_t rows, std::size_t cols, std::initializer_list<T> values) {
  return Array({rows, cols}, std::vector<T>(values));
}

template <typename T>
void Array<T>::set_zero() {
  std::fill(data_.begin(), data_.end(), T(0));
}

template <typename T>
bool Array<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Array<float>;
template class Array<double>;
template class Array<long double>;

}  // namespace hmn::num
