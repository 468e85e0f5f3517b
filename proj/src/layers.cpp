#include "hlsforge/layers.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "hlsforge/error.hpp"

namespace hlsforge::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

MapMat as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MapMat(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
ConstMapMat as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMapMat(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MapMat as_matrix(double* p, std::size_t rows, std::size_t cols) {
  return MapMat(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
ConstMapMat as_matrix(const double* p, std::size_t rows, std::size_t cols) {
  return ConstMapMat(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

// Image extent and the grid of kernel placements over it.
struct Patch {
  std::size_t channels, height, width;
  std::size_t out_h, out_w;
  const ConvGeometry& g;
};

// cols[(c*kh + i)*kw + j][oh*out_w + ow] = image[c][oh*s - p + i][ow*s - p + j]
void im2col(const double* image, const Patch& p, double* cols) {
  const std::size_t ncols = p.out_h * p.out_w;
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t i = 0; i < p.g.kernel_h; ++i) {
      for (std::size_t j = 0; j < p.g.kernel_w; ++j) {
        double* dst = cols + ((c * p.g.kernel_h + i) * p.g.kernel_w + j) * ncols;
        for (std::size_t oh = 0; oh < p.out_h; ++oh) {
          const auto y = static_cast<std::ptrdiff_t>(oh * p.g.stride + i) - static_cast<std::ptrdiff_t>(p.g.pad);
          for (std::size_t ow = 0; ow < p.out_w; ++ow) {
            const auto x = static_cast<std::ptrdiff_t>(ow * p.g.stride + j) - static_cast<std::ptrdiff_t>(p.g.pad);
            const bool inside = y >= 0 && x >= 0 && y < static_cast<std::ptrdiff_t>(p.height) &&
                                x < static_cast<std::ptrdiff_t>(p.width);
            dst[oh * p.out_w + ow] =
                inside ? image[(c * p.height + static_cast<std::size_t>(y)) * p.width + static_cast<std::size_t>(x)]
                       : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds columns back onto the image.
void col2im(const double* cols, const Patch& p, double* image) {
  const std::size_t ncols = p.out_h * p.out_w;
  for (std::size_t c = 0; c < p.channels; ++c) {
    for (std::size_t i = 0; i < p.g.kernel_h; ++i) {
      for (std::size_t j = 0; j < p.g.kernel_w; ++j) {
        const double* src = cols + ((c * p.g.kernel_h + i) * p.g.kernel_w + j) * ncols;
        for (std::size_t oh = 0; oh < p.out_h; ++oh) {
          const auto y = static_cast<std::ptrdiff_t>(oh * p.g.stride + i) - static_cast<std::ptrdiff_t>(p.g.pad);
          if (y < 0 || y >= static_cast<std::ptrdiff_t>(p.height)) continue;
          for (std::size_t ow = 0; ow < p.out_w; ++ow) {
            const auto x = static_cast<std::ptrdiff_t>(ow * p.g.stride + j) - static_cast<std::ptrdiff_t>(p.g.pad);
            if (x < 0 || x >= static_cast<std::ptrdiff_t>(p.width)) continue;
            image[(c * p.height + static_cast<std::size_t>(y)) * p.width + static_cast<std::size_t>(x)] +=
                src[oh * p.out_w + ow];
          }
        }
      }
    }
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* where) {
  if (x.rank() != rank)
    throw Error(ErrorKind::kShape, std::string(where) + ": expected rank " + std::to_string(rank) +
                                       " input, got " + shape_string(x.shape()));
}

std::string geometry_string(const ConvGeometry& g) {
  return "k" + std::to_string(g.kernel_h) + "x" + std::to_string(g.kernel_w) + " s" +
         std::to_string(g.stride) + " p" + std::to_string(g.pad);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

// ---------------------------------------------------------------- Linear

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : in_(in),
      out_(out),
      weight_("weight", uniform_tensor({out, in}, 1.0 / std::sqrt(static_cast<double>(in)), rng)),
      bias_("bias", uniform_tensor({out}, 1.0 / std::sqrt(static_cast<double>(in)), rng)) {}

Tensor Linear::forward(const Tensor& x) {
  require_rank(x, 2, "linear");
  if (x.dim(1) != in_) throw Error(ErrorKind::kShape, "linear: input width mismatch");
  input_ = x;
  const std::size_t n = x.dim(0);
  Tensor y({n, out_});
  auto Y = as_matrix(y, n, out_);
  Y.noalias() = as_matrix(x, n, in_) * as_matrix(weight_.value, out_, in_).transpose();
  Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias_.value.data(), static_cast<Eigen::Index>(out_));
  require_finite(y, "linear forward");
  return y;
}

Tensor Linear::backward(const Tensor& grad_out) {
  const std::size_t n = input_.dim(0);
  require_shape(grad_out, {n, out_}, "linear backward");
  const auto G = as_matrix(grad_out, n, out_);
  as_matrix(weight_.grad, out_, in_).noalias() += G.transpose() * as_matrix(input_, n, in_);
  Eigen::Map<Eigen::RowVectorXd>(bias_.grad.data(), static_cast<Eigen::Index>(out_)) += G.colwise().sum();
  Tensor dx({n, in_});
  as_matrix(dx, n, in_).noalias() = G * as_matrix(weight_.value, out_, in_);
  return dx;
}

std::string Linear::describe() const {
  return "linear(" + std::to_string(in_) + "->" + std::to_string(out_) + ")";
}

// ---------------------------------------------------------------- geometry

std::size_t ConvGeometry::conv_out(std::size_t in, std::size_t kernel) const {
  if (in + 2 * pad < kernel || stride == 0) throw Error(ErrorKind::kShape, "convolution kernel exceeds input");
  return (in + 2 * pad - kernel) / stride + 1;
}

std::size_t ConvGeometry::deconv_out(std::size_t in, std::size_t kernel) const {
  if (in == 0 || (in - 1) * stride + kernel < 2 * pad)
    throw Error(ErrorKind::kShape, "transposed convolution output would be empty");
  return (in - 1) * stride + kernel - 2 * pad;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_ch, std::size_t out_ch, ConvGeometry geom, Rng& rng, bool bias)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      geom_(geom),
      has_bias_(bias),
      weight_("weight", normal_tensor({out_ch, in_ch * geom.kernel_h * geom.kernel_w}, 0.02, rng)),
      bias_("bias", Tensor({out_ch})) {}

std::vector<Parameter*> Conv2d::parameters() {
  if (has_bias_) return {&weight_, &bias_};
  return {&weight_};
}

Tensor Conv2d::forward(const Tensor& x) {
  require_rank(x, 4, "conv2d");
  if (x.dim(1) != in_ch_) throw Error(ErrorKind::kShape, "conv2d: channel mismatch");
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const Patch patch{in_ch_, h, w, geom_.conv_out(h, geom_.kernel_h), geom_.conv_out(w, geom_.kernel_w), geom_};
  const std::size_t k = in_ch_ * geom_.kernel_h * geom_.kernel_w;
  const std::size_t hw_out = patch.out_h * patch.out_w;
  input_shape_ = x.shape();
  columns_.assign(n, Tensor());
  Tensor y({n, out_ch_, patch.out_h, patch.out_w});
  const auto W = as_matrix(weight_.value, out_ch_, k);
  for (std::size_t s = 0; s < n; ++s) {
    columns_[s] = Tensor({k, hw_out});
    im2col(x.data() + s * in_ch_ * h * w, patch, columns_[s].data());
    auto Y = as_matrix(y.data() + s * out_ch_ * hw_out, out_ch_, hw_out);
    Y.noalias() = W * as_matrix(columns_[s], k, hw_out);
    if (has_bias_) Y.colwise() += Eigen::Map<const Eigen::VectorXd>(bias_.value.data(), static_cast<Eigen::Index>(out_ch_));
  }
  require_finite(y, "conv2d forward");
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const std::size_t n = input_shape_[0], h = input_shape_[2], w = input_shape_[3];
  const Patch patch{in_ch_, h, w, geom_.conv_out(h, geom_.kernel_h), geom_.conv_out(w, geom_.kernel_w), geom_};
  const std::size_t k = in_ch_ * geom_.kernel_h * geom_.kernel_w;
  const std::size_t hw_out = patch.out_h * patch.out_w;
  require_shape(grad_out, {n, out_ch_, patch.out_h, patch.out_w}, "conv2d backward");
  Tensor dx(input_shape_);
  Tensor dcols({k, hw_out});
  const auto W = as_matrix(weight_.value, out_ch_, k);
  auto dW = as_matrix(weight_.grad, out_ch_, k);
  for (std::size_t s = 0; s < n; ++s) {
    const auto G = as_matrix(grad_out.data() + s * out_ch_ * hw_out, out_ch_, hw_out);
    dW.noalias() += G * as_matrix(columns_[s], k, hw_out).transpose();
    if (has_bias_) Eigen::Map<Eigen::VectorXd>(bias_.grad.data(), static_cast<Eigen::Index>(out_ch_)) += G.rowwise().sum();
    as_matrix(dcols, k, hw_out).noalias() = W.transpose() * G;
    col2im(dcols.data(), patch, dx.data() + s * in_ch_ * h * w);
  }
  return dx;
}

std::string Conv2d::describe() const {
  return "conv2d(" + std::to_string(in_ch_) + "->" + std::to_string(out_ch_) + " " + geometry_string(geom_) + ")";
}

// ---------------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::size_t in_ch, std::size_t out_ch, ConvGeometry geom, Rng& rng, bool bias)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      geom_(geom),
      has_bias_(bias),
      weight_("weight", normal_tensor({in_ch, out_ch * geom.kernel_h * geom.kernel_w}, 0.02, rng)),
      bias_("bias", Tensor({out_ch})) {}

std::vector<Parameter*> ConvTranspose2d::parameters() {
  if (has_bias_) return {&weight_, &bias_};
  return {&weight_};
}

Tensor ConvTranspose2d::forward(const Tensor& x) {
  require_rank(x, 4, "deconv2d");
  if (x.dim(1) != in_ch_) throw Error(ErrorKind::kShape, "deconv2d: channel mismatch");
  const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t out_h = geom_.deconv_out(h, geom_.kernel_h), out_w = geom_.deconv_out(w, geom_.kernel_w);
  // The output image is the "input" side of the matching convolution.
  const Patch patch{out_ch_, out_h, out_w, h, w, geom_};
  const std::size_t k = out_ch_ * geom_.kernel_h * geom_.kernel_w;
  input_ = x;
  output_shape_ = {n, out_ch_, out_h, out_w};
  Tensor y(output_shape_);
  Tensor cols({k, h * w});
  const auto W = as_matrix(weight_.value, in_ch_, k);
  for (std::size_t s = 0; s < n; ++s) {
    as_matrix(cols, k, h * w).noalias() = W.transpose() * as_matrix(x.data() + s * in_ch_ * h * w, in_ch_, h * w);
    double* img = y.data() + s * out_ch_ * out_h * out_w;
    col2im(cols.data(), patch, img);
    if (has_bias_) {
      for (std::size_t c = 0; c < out_ch_; ++c)
        for (std::size_t i = 0; i < out_h * out_w; ++i) img[c * out_h * out_w + i] += bias_.value[c];
    }
  }
  require_finite(y, "deconv2d forward");
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out) {
  require_shape(grad_out, output_shape_, "deconv2d backward");
  const std::size_t n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
  const std::size_t out_h = output_shape_[2], out_w = output_shape_[3];
  const Patch patch{out_ch_, out_h, out_w, h, w, geom_};
  const std::size_t k = out_ch_ * geom_.kernel_h * geom_.kernel_w;
  Tensor dx(input_.shape());
  Tensor dcols({k, h * w});
  const auto W = as_matrix(weight_.value, in_ch_, k);
  auto dW = as_matrix(weight_.grad, in_ch_, k);
  for (std::size_t s = 0; s < n; ++s) {
    const double* g = grad_out.data() + s * out_ch_ * out_h * out_w;
    im2col(g, patch, dcols.data());
    const auto X = as_matrix(input_.data() + s * in_ch_ * h * w, in_ch_, h * w);
    as_matrix(dx.data() + s * in_ch_ * h * w, in_ch_, h * w).noalias() = W * as_matrix(dcols, k, h * w);
    dW.noalias() += X * as_matrix(dcols, k, h * w).transpose();
    if (has_bias_) {
      for (std::size_t c = 0; c < out_ch_; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < out_h * out_w; ++i) acc += g[c * out_h * out_w + i];
        bias_.grad[c] += acc;
      }
    }
  }
  return dx;
}

std::string ConvTranspose2d::describe() const {
  return "deconv2d(" + std::to_string(in_ch_) + "->" + std::to_string(out_ch_) + " " + geometry_string(geom_) + ")";
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::size_t channels, double momentum, double eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_("gamma", Tensor({channels}, 1.0)),
      beta_("beta", Tensor({channels})),
      running_mean_({channels}),
      running_var_({channels}, 1.0) {}

Tensor BatchNorm::forward(const Tensor& x) {
  if (x.rank() != 2 && x.rank() != 4)
    throw Error(ErrorKind::kShape, "batchnorm: expected [N, C] or [N, C, H, W] input");
  if (x.dim(1) != channels_) throw Error(ErrorKind::kShape, "batchnorm: channel mismatch");
  input_shape_ = x.shape();
  const std::size_t n = x.dim(0);
  const std::size_t inner = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  const double count = static_cast<double>(n * inner);
  normalized_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  Tensor y(x.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean, var;
    if (training_) {
      double acc = 0.0;
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < inner; ++i) acc += x[(s * channels_ + c) * inner + i];
      mean = acc / count;
      double sq = 0.0;
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = x[(s * channels_ + c) * inner + i] - mean;
          sq += d * d;
        }
      var = sq / count;
      const double unbiased = count > 1.0 ? sq / (count - 1.0) : var;
      running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
      running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv_std;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = (s * channels_ + c) * inner + i;
        normalized_[idx] = (x[idx] - mean) * inv_std;
        y[idx] = gamma_.value[c] * normalized_[idx] + beta_.value[c];
      }
  }
  require_finite(y, "batchnorm forward");
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  require_shape(grad_out, input_shape_, "batchnorm backward");
  const std::size_t n = input_shape_[0];
  const std::size_t inner = input_shape_.size() == 4 ? input_shape_[2] * input_shape_[3] : 1;
  const double count = static_cast<double>(n * inner);
  Tensor dx(input_shape_);
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = (s * channels_ + c) * inner + i;
        sum_dy += grad_out[idx];
        sum_dy_xhat += grad_out[idx] * normalized_[idx];
      }
    gamma_.grad[c] += sum_dy_xhat;
    beta_.grad[c] += sum_dy;
    const double g = gamma_.value[c];
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = (s * channels_ + c) * inner + i;
        if (training_) {
          dx[idx] = g * inv_std_[c] / count *
                    (count * grad_out[idx] - sum_dy - normalized_[idx] * sum_dy_xhat);
        } else {
          dx[idx] = g * inv_std_[c] * grad_out[idx];
        }
      }
  }
  return dx;
}

std::string BatchNorm::describe() const { return "batchnorm(" + std::to_string(channels_) + ")"; }

// ---------------------------------------------------------------- activations

Tensor ReLU::forward(const Tensor& x) {
  input_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  require_finite(y, "relu forward");
  return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  require_shape(grad_out, input_.shape(), "relu backward");
  Tensor dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = input_[i] > 0.0 ? grad_out[i] : 0.0;
  return dx;
}

Tensor LeakyReLU::forward(const Tensor& x) {
  input_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = leaky_relu(x[i], slope_);
  require_finite(y, "leaky_relu forward");
  return y;
}

Tensor LeakyReLU::backward(const Tensor& grad_out) {
  require_shape(grad_out, input_.shape(), "leaky_relu backward");
  Tensor dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = input_[i] > 0.0 ? grad_out[i] : slope_ * grad_out[i];
  return dx;
}

std::string LeakyReLU::describe() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "leaky_relu(%g)", slope_);
  return buf;
}

Tensor Sigmoid::forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  require_finite(y, "sigmoid forward");
  output_ = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  require_shape(grad_out, output_.shape(), "sigmoid backward");
  Tensor dx(grad_out.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad_out[i] * output_[i] * (1.0 - output_[i]);
  return dx;
}

// ---------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    auto p = layer->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<Tensor*> Sequential::buffers() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    auto b = layer->buffers();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void Sequential::set_training(bool training) {
  for (auto& layer : layers_) layer->set_training(training);
}

std::string Sequential::describe() const {
  std::string s;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i) s += " > ";
    s += layers_[i]->describe();
  }
  return s;
}

void Sequential::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

}  // namespace hlsforge::nn
