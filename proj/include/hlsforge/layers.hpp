#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hlsforge/rng.hpp"
#include "hlsforge/tensor.hpp"

namespace hlsforge::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void zero_grad() { grad.fill(0.0); }
};

// A differentiable stage. forward() caches whatever backward() needs, so the
// two must be called in matching order. backward() accumulates parameter
// gradients and returns the gradient with respect to the forward input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  // Non-trainable state saved with checkpoints (batchnorm running stats).
  virtual std::vector<Tensor*> buffers() { return {}; }
  virtual void set_training(bool) {}
  virtual std::string describe() const = 0;
};

// y = x W^T + b for x of shape [N, in]; W has shape [out, in].
class Linear final : public Layer {
 public:
  Linear(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  std::string describe() const override;

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Parameter weight_, bias_;
  Tensor input_;
};

struct ConvGeometry {
  std::size_t kernel_h = 4;
  std::size_t kernel_w = 4;
  std::size_t stride = 2;
  std::size_t pad = 1;

  // Output extent of a convolution over an input extent.
  std::size_t conv_out(std::size_t in, std::size_t kernel) const;
  // Output extent of a transposed convolution.
  std::size_t deconv_out(std::size_t in, std::size_t kernel) const;
};

// 2-D convolution over [N, C, H, W]; weight shape [out_ch, in_ch * kh * kw].
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_ch, std::size_t out_ch, ConvGeometry geom, Rng& rng, bool bias = true);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override;
  std::string describe() const override;

  Parameter& weight() { return weight_; }

 private:
  std::size_t in_ch_, out_ch_;
  ConvGeometry geom_;
  bool has_bias_;
  Parameter weight_, bias_;
  Shape input_shape_;
  std::vector<Tensor> columns_;  // im2col of each sample
};

// Transposed convolution, the adjoint of Conv2d with the same weight layout
// [in_ch, out_ch * kh * kw].
class ConvTranspose2d final : public Layer {
 public:
  ConvTranspose2d(std::size_t in_ch, std::size_t out_ch, ConvGeometry geom, Rng& rng, bool bias = true);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override;
  std::string describe() const override;

  Parameter& weight() { return weight_; }

 private:
  std::size_t in_ch_, out_ch_;
  ConvGeometry geom_;
  bool has_bias_;
  Parameter weight_, bias_;
  Tensor input_;
  Shape output_shape_;
};

// Per-channel normalization over [N, C] or [N, C, H, W].
class BatchNorm final : public Layer {
 public:
  explicit BatchNorm(std::size_t channels, double momentum = 0.1, double eps = 1e-5);
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> buffers() override { return {&running_mean_, &running_var_}; }
  void set_training(bool training) override { training_ = training; }
  std::string describe() const override;

 private:
  std::size_t channels_;
  double momentum_, eps_;
  bool training_ = true;
  Parameter gamma_, beta_;
  Tensor running_mean_, running_var_;
  Tensor normalized_;
  std::vector<double> inv_std_;
  Shape input_shape_;
};

class ReLU final : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "relu"; }

 private:
  Tensor input_;
};

class LeakyReLU final : public Layer {
 public:
  explicit LeakyReLU(double slope = 0.2) : slope_(slope) {}
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

 private:
  double slope_;
  Tensor input_;
};

class Sigmoid final : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "sigmoid"; }

 private:
  Tensor output_;
};

// Layers applied in order; backward runs them in reverse.
class Sequential final : public Layer {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override;
  std::vector<Tensor*> buffers() override;
  void set_training(bool training) override;
  std::string describe() const override;

  std::size_t size() const { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_.at(i); }
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

double sigmoid(double x);
double leaky_relu(double x, double slope);

}  // namespace hlsforge::nn
