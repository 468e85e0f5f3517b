#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace hlsforge::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Storage starts on a cache line so vectorized kernels see the same
// alignment, and therefore the same summation order, on every allocation.
template <typename T>
struct CacheAlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  CacheAlignedAllocator() = default;
  template <typename U>
  CacheAlignedAllocator(const CacheAlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const CacheAlignedAllocator<U>&) const { return true; }
};

// Dense row-major array of 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  void fill(double v);
  bool all_finite() const;
  // Same data under a new shape of equal size.
  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  using Storage = std::vector<double, CacheAlignedAllocator<double>>;
  struct Adopt {};
  Tensor(Adopt, Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {}

  Shape shape_;
  Storage data_;
};

double dot(const Tensor& a, const Tensor& b);
double sum(const Tensor& t);

// Throws Error(kDivergence) naming `where` when t holds NaN or Inf.
void require_finite(const Tensor& t, const char* where);
// Throws Error(kShape) unless the shapes match.
void require_shape(const Tensor& t, const Shape& expected, const char* where);

}  // namespace hlsforge::nn
