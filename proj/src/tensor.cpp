#include "hlsforge/tensor.hpp"

#include <cmath>
#include <numeric>

#include "hlsforge/error.hpp"

namespace hlsforge::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (data_.size() != shape_size(shape_))
    throw Error(ErrorKind::kShape, "tensor data does not match shape " + shape_string(shape_));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size())
    throw Error(ErrorKind::kShape, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(Adopt{}, std::move(shape), data_);
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShape, "dot: size mismatch");
  return std::inner_product(a.data(), a.data() + a.size(), b.data(), 0.0);
}

double sum(const Tensor& t) { return std::accumulate(t.data(), t.data() + t.size(), 0.0); }

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite())
    throw Error(ErrorKind::kDivergence, std::string("non-finite values in ") + where);
}

void require_shape(const Tensor& t, const Shape& expected, const char* where) {
  if (t.shape() != expected)
    throw Error(ErrorKind::kShape, std::string(where) + ": expected shape " + shape_string(expected) +
                                       ", got " + shape_string(t.shape()));
}

}  // namespace hlsforge::nn
