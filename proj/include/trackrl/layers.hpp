#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

#include "trackrl/tensor.hpp"

namespace trackrl {

enum class Activation { linear, leaky_relu, tanh };

struct ActivationSpec {
  Activation kind = Activation::linear;
  double alpha = 0.01;  // leaky-relu slope

  static ActivationSpec linear() { return {Activation::linear, 0.0}; }
  static ActivationSpec leaky(double alpha = 0.01) {
    return {Activation::leaky_relu, alpha};
  }
  static ActivationSpec tanh() { return {Activation::tanh, 0.0}; }
};

inline double leaky_relu(double x, double alpha) {
  return x >= 0.0 ? x : alpha * x;
}

inline Tensor leaky_relu(const Tensor& x, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("leaky-relu slope must be > 0");
  Tensor y = x;
  for (double& v : y.data()) v = leaky_relu(v, alpha);
  return y;
}

inline double activate(const ActivationSpec& act, double x) {
  switch (act.kind) {
    case Activation::leaky_relu:
      return leaky_relu(x, act.alpha);
    case Activation::tanh: {
      // Saturated tanh rounds to +-1; keep outputs strictly inside (-1, 1).
      constexpr double kMax = 1.0 - 0x1p-53;
      const double y = std::tanh(x);
      return y > kMax ? kMax : (y < -kMax ? -kMax : y);
    }
    case Activation::linear:
      break;
  }
  return x;
}

// Derivative expressed through the pre-activation `x` and output `y`.
inline double activation_derivative(const ActivationSpec& act, double x,
                                    double y) {
  switch (act.kind) {
    case Activation::leaky_relu:
      return x >= 0.0 ? 1.0 : act.alpha;
    case Activation::tanh:
      return 1.0 - y * y;
    case Activation::linear:
      break;
  }
  return 1.0;
}

enum class LayerKind { dense, conv2d, conv3d };

inline const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::conv3d: return "conv3d";
  }
  return "?";
}

inline const char* to_string(Activation kind) {
  switch (kind) {
    case Activation::linear: return "linear";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

// Kernel and stride extents are (time, height, width); conv2d ignores time.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t outputs = 1;  // units for dense, filters for conv
  std::array<std::size_t, 3> kernel{1, 1, 1};
  std::array<std::size_t, 3> stride{1, 1, 1};
  ActivationSpec activation;

  static LayerSpec dense(std::size_t units, ActivationSpec act) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.outputs = units;
    s.activation = act;
    return s;
  }
  static LayerSpec conv2d(std::size_t filters, std::size_t kh, std::size_t kw,
                          std::size_t stride, ActivationSpec act) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.outputs = filters;
    s.kernel = {1, kh, kw};
    s.stride = {1, stride, stride};
    s.activation = act;
    return s;
  }
  static LayerSpec conv3d(std::size_t filters, std::array<std::size_t, 3> kernel,
                          std::array<std::size_t, 3> stride, ActivationSpec act) {
    LayerSpec s;
    s.kind = LayerKind::conv3d;
    s.outputs = filters;
    s.kernel = kernel;
    s.stride = stride;
    s.activation = act;
    return s;
  }
};

namespace detail {

// Geometry of a valid-padding convolution over [C, D, H, W].
struct ConvGeometry {
  std::size_t channels, depth, height, width;
  std::size_t kd, kh, kw;
  std::size_t sd, sh, sw;
  std::size_t od, oh, ow;
};

inline std::size_t conv_extent(std::size_t in, std::size_t k, std::size_t s,
                               const char* axis) {
  if (s == 0) throw std::invalid_argument("convolution stride must be >= 1");
  if (k == 0 || k > in) {
    throw std::invalid_argument(std::string("convolution kernel extent along ") +
                                axis + " (" + std::to_string(k) +
                                ") exceeds input extent " + std::to_string(in));
  }
  return (in - k) / s + 1;
}

inline ConvGeometry conv_geometry(std::size_t c, std::size_t d, std::size_t h,
                                  std::size_t w, std::array<std::size_t, 3> k,
                                  std::array<std::size_t, 3> s) {
  ConvGeometry g{c, d, h, w, k[0], k[1], k[2], s[0], s[1], s[2], 0, 0, 0};
  g.od = conv_extent(d, k[0], s[0], "time");
  g.oh = conv_extent(h, k[1], s[1], "height");
  g.ow = conv_extent(w, k[2], s[2], "width");
  return g;
}

// out[f, od, oh, ow] = sum_{c,kd,kh,kw} in[c, od*sd+kd, oh*sh+kh, ow*sw+kw] * w[f,c,kd,kh,kw]
// `out` is accumulated into, bias is not applied.
inline void conv_accumulate(const ConvGeometry& g, std::size_t filters,
                            const double* in, const double* weights,
                            double* out) {
  const std::size_t plane = g.height * g.width;
  const std::size_t vol = g.depth * plane;
  const std::size_t oplane = g.oh * g.ow;
  const std::size_t ovol = g.od * oplane;
  for (std::size_t f = 0; f < filters; ++f) {
    double* of = out + f * ovol;
    for (std::size_t c = 0; c < g.channels; ++c) {
      const double* ic = in + c * vol;
      for (std::size_t kd = 0; kd < g.kd; ++kd) {
        for (std::size_t kh = 0; kh < g.kh; ++kh) {
          for (std::size_t kw = 0; kw < g.kw; ++kw) {
            const double wv = *weights++;
            for (std::size_t od = 0; od < g.od; ++od) {
              const double* id = ic + (od * g.sd + kd) * plane;
              double* o = of + od * oplane;
              for (std::size_t oh = 0; oh < g.oh; ++oh) {
                const double* row = id + (oh * g.sh + kh) * g.width + kw;
                double* orow = o + oh * g.ow;
                for (std::size_t ow = 0; ow < g.ow; ++ow) {
                  orow[ow] += wv * row[ow * g.sw];
                }
              }
            }
          }
        }
      }
    }
  }
}

// Accumulates weight gradients and/or input gradients for conv_accumulate.
inline void conv_backward(const ConvGeometry& g, std::size_t filters,
                          const double* in, const double* weights,
                          const double* dout, double* dweights, double* din) {
  const std::size_t plane = g.height * g.width;
  const std::size_t vol = g.depth * plane;
  const std::size_t oplane = g.oh * g.ow;
  const std::size_t ovol = g.od * oplane;
  std::size_t widx = 0;
  for (std::size_t f = 0; f < filters; ++f) {
    const double* df = dout + f * ovol;
    for (std::size_t c = 0; c < g.channels; ++c) {
      const std::size_t coff = c * vol;
      for (std::size_t kd = 0; kd < g.kd; ++kd) {
        for (std::size_t kh = 0; kh < g.kh; ++kh) {
          for (std::size_t kw = 0; kw < g.kw; ++kw, ++widx) {
            const double wv = weights[widx];
            double acc = 0.0;
            for (std::size_t od = 0; od < g.od; ++od) {
              const std::size_t doff = coff + (od * g.sd + kd) * plane;
              const double* d = df + od * oplane;
              for (std::size_t oh = 0; oh < g.oh; ++oh) {
                const std::size_t roff = doff + (oh * g.sh + kh) * g.width + kw;
                const double* drow = d + oh * g.ow;
                if (dweights) {
                  const double* row = in + roff;
                  for (std::size_t ow = 0; ow < g.ow; ++ow) {
                    acc += drow[ow] * row[ow * g.sw];
                  }
                }
                if (din) {
                  double* irow = din + roff;
                  for (std::size_t ow = 0; ow < g.ow; ++ow) {
                    irow[ow * g.sw] += wv * drow[ow];
                  }
                }
              }
            }
            if (dweights) dweights[widx] += acc;
          }
        }
      }
    }
  }
}

}  // namespace detail

// Cross-correlation of a [C, H, W] input with a [F, C, kH, kW] kernel.
inline Tensor conv2d_forward(const Tensor& input, const Tensor& kernel,
                             std::size_t stride) {
  if (input.rank() != 3 || kernel.rank() != 4 ||
      kernel.shape()[1] != input.shape()[0]) {
    throw std::invalid_argument("conv2d expects input [C,H,W] and kernel "
                                "[F,C,kH,kW], got " + to_string(input.shape()) +
                                " and " + to_string(kernel.shape()));
  }
  const auto& is = input.shape();
  const auto& ks = kernel.shape();
  const auto g = detail::conv_geometry(is[0], 1, is[1], is[2], {1, ks[2], ks[3]},
                                       {1, stride, stride});
  Tensor out({ks[0], g.oh, g.ow});
  detail::conv_accumulate(g, ks[0], input.data().data(), kernel.data().data(),
                          out.data().data());
  return out;
}

// Cross-correlation of a [C, D, H, W] input with a [F, C, kD, kH, kW] kernel.
inline Tensor conv3d_forward(const Tensor& input, const Tensor& kernel,
                             std::array<std::size_t, 3> stride) {
  if (input.rank() != 4 || kernel.rank() != 5 ||
      kernel.shape()[1] != input.shape()[0]) {
    throw std::invalid_argument("conv3d expects input [C,D,H,W] and kernel "
                                "[F,C,kD,kH,kW], got " +
                                to_string(input.shape()) + " and " +
                                to_string(kernel.shape()));
  }
  const auto& is = input.shape();
  const auto& ks = kernel.shape();
  const auto g = detail::conv_geometry(is[0], is[1], is[2], is[3],
                                       {ks[2], ks[3], ks[4]}, stride);
  Tensor out({ks[0], g.od, g.oh, g.ow});
  detail::conv_accumulate(g, ks[0], input.data().data(), kernel.data().data(),
                          out.data().data());
  return out;
}

// One trainable layer with its own activation cache. Layers are plain values
// so whole networks copy cheaply into target networks.
class Layer {
 public:
  Layer(const LayerSpec& spec, const Shape& input_shape) : spec_(spec) {
    if (spec.outputs == 0) throw std::invalid_argument("layer needs >= 1 output");
    if (spec.activation.kind == Activation::leaky_relu &&
        !(spec.activation.alpha > 0.0)) {
      throw std::invalid_argument("leaky-relu slope must be > 0");
    }
    input_shape_ = input_shape;
    switch (spec.kind) {
      case LayerKind::dense: {
        const std::size_t fan_in = shape_size(input_shape);
        weights_ = Tensor({spec.outputs, fan_in});
        output_shape_ = {spec.outputs};
        break;
      }
      case LayerKind::conv2d: {
        if (input_shape.size() != 3) {
          throw std::invalid_argument("conv2d layer expects [C,H,W] input, got " +
                                      to_string(input_shape));
        }
        geom_ = detail::conv_geometry(input_shape[0], 1, input_shape[1],
                                      input_shape[2], {1, spec.kernel[1], spec.kernel[2]},
                                      {1, spec.stride[1], spec.stride[2]});
        weights_ = Tensor({spec.outputs, geom_.channels, geom_.kh, geom_.kw});
        output_shape_ = {spec.outputs, geom_.oh, geom_.ow};
        break;
      }
      case LayerKind::conv3d: {
        if (input_shape.size() != 4) {
          throw std::invalid_argument("conv3d layer expects [C,D,H,W] input, got " +
                                      to_string(input_shape));
        }
        geom_ = detail::conv_geometry(input_shape[0], input_shape[1],
                                      input_shape[2], input_shape[3], spec.kernel,
                                      spec.stride);
        weights_ = Tensor({spec.outputs, geom_.channels, geom_.kd, geom_.kh, geom_.kw});
        output_shape_ = {spec.outputs, geom_.od, geom_.oh, geom_.ow};
        break;
      }
    }
    bias_ = Tensor({spec.outputs});
    grad_weights_ = Tensor(weights_.shape());
    grad_bias_ = Tensor(bias_.shape());
    pre_ = Tensor(output_shape_);
    out_ = Tensor(output_shape_);
  }

  const LayerSpec& spec() const { return spec_; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }

  Tensor& weights() { return weights_; }
  Tensor& bias() { return bias_; }
  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }
  Tensor& grad_weights() { return grad_weights_; }
  Tensor& grad_bias() { return grad_bias_; }
  const Tensor& grad_weights() const { return grad_weights_; }
  const Tensor& grad_bias() const { return grad_bias_; }

  std::size_t fan_in() const {
    return weights_.size() / spec_.outputs;
  }

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  template <class Rng>
  void initialize(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : weights_.data()) w = dist(rng);
    for (double& b : bias_.data()) b = dist(rng);
  }

  // Forward pass on a flat input span; output written to `pre`/`out`.
  void compute(std::span<const double> in, std::span<double> pre,
               std::span<double> out) const {
    const double* b = bias_.data().data();
    const std::size_t n_out = spec_.outputs;
    if (spec_.kind == LayerKind::dense) {
      const std::size_t n_in = in.size();
      const double* w = weights_.data().data();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double* row = w + o * n_in;
        double acc = 0.0;
        for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
        pre[o] = acc + b[o];
      }
    } else {
      std::fill(pre.begin(), pre.end(), 0.0);
      detail::conv_accumulate(geom_, n_out, in.data(), weights_.data().data(),
                              pre.data());
      const std::size_t per = pre.size() / n_out;
      for (std::size_t f = 0; f < n_out; ++f) {
        for (std::size_t i = 0; i < per; ++i) pre[f * per + i] += b[f];
      }
    }
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = activate(spec_.activation, pre[i]);
  }

  const Tensor& forward(std::span<const double> in) {
    input_.assign(in.begin(), in.end());
    compute(input_, pre_.data(), out_.data());
    return out_;
  }

  const Tensor& output() const { return out_; }

  // Backward from d(objective)/d(output). Accumulates parameter gradients
  // when requested and writes d/d(input) into `din` when non-empty.
  void backward(std::span<const double> dout, bool param_grads,
                std::span<double> din) {
    std::vector<double>& dpre = scratch_;
    dpre.resize(dout.size());
    const auto pre = pre_.data();
    const auto out = out_.data();
    for (std::size_t i = 0; i < dout.size(); ++i) {
      dpre[i] = dout[i] * activation_derivative(spec_.activation, pre[i], out[i]);
    }
    const std::size_t n_out = spec_.outputs;
    double* gb = grad_bias_.data().data();
    if (spec_.kind == LayerKind::dense) {
      const std::size_t n_in = input_.size();
      const double* w = weights_.data().data();
      double* gw = grad_weights_.data().data();
      if (!din.empty()) std::fill(din.begin(), din.end(), 0.0);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double d = dpre[o];
        if (param_grads) {
          gb[o] += d;
          double* grow = gw + o * n_in;
          for (std::size_t i = 0; i < n_in; ++i) grow[i] += d * input_[i];
        }
        if (!din.empty()) {
          const double* row = w + o * n_in;
          for (std::size_t i = 0; i < n_in; ++i) din[i] += d * row[i];
        }
      }
    } else {
      if (param_grads) {
        const std::size_t per = dpre.size() / n_out;
        for (std::size_t f = 0; f < n_out; ++f) {
          double acc = 0.0;
          for (std::size_t i = 0; i < per; ++i) acc += dpre[f * per + i];
          gb[f] += acc;
        }
      }
      if (!din.empty()) std::fill(din.begin(), din.end(), 0.0);
      if (param_grads || !din.empty()) {
        detail::conv_backward(geom_, n_out, input_.data(), weights_.data().data(),
                              dpre.data(),
                              param_grads ? grad_weights_.data().data() : nullptr,
                              din.empty() ? nullptr : din.data());
      }
    }
  }

  void zero_grad() {
    grad_weights_.fill(0.0);
    grad_bias_.fill(0.0);
  }

 private:
  LayerSpec spec_;
  Shape input_shape_;
  Shape output_shape_;
  detail::ConvGeometry geom_{};
  Tensor weights_;
  Tensor bias_;
  Tensor grad_weights_;
  Tensor grad_bias_;
  std::vector<double> input_;
  Tensor pre_;
  Tensor out_;
  std::vector<double> scratch_;
};

}  // namespace trackrl
