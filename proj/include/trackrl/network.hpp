#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/layers.hpp"
#include "trackrl/tensor.hpp"

namespace trackrl {

struct BranchSpec {
  std::string name;
  Shape input_shape;
  std::vector<LayerSpec> layers;  // may be empty: input passes through flattened
};

// Multi-input single-output network: every branch feeds one concatenation,
// followed by the trunk. The last trunk layer carries the output activation.
struct NetworkSpec {
  std::vector<BranchSpec> branches;
  std::vector<LayerSpec> trunk;
};

// Canonical text form; two specs describe the same architecture iff equal.
inline std::string describe(const NetworkSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  auto layer = [&](const LayerSpec& l) {
    os << to_string(l.kind) << '(' << l.outputs;
    if (l.kind != LayerKind::dense) {
      os << ";k=" << l.kernel[0] << ',' << l.kernel[1] << ',' << l.kernel[2]
         << ";s=" << l.stride[0] << ',' << l.stride[1] << ',' << l.stride[2];
    }
    os << ';' << to_string(l.activation.kind);
    if (l.activation.kind == Activation::leaky_relu) os << '=' << l.activation.alpha;
    os << ')';
  };
  for (const auto& b : spec.branches) {
    os << "branch " << b.name << ' ' << to_string(b.input_shape) << ':';
    for (const auto& l : b.layers) layer(l);
    os << '\n';
  }
  os << "trunk:";
  for (const auto& l : spec.trunk) layer(l);
  return os.str();
}

// FNV-1a, 64-bit.
inline std::uint64_t fnv1a(std::string_view text,
                           std::uint64_t hash = 1469598103934665603ULL) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::uint64_t spec_hash(const NetworkSpec& spec) {
  return fnv1a(describe(spec));
}

// Which gradients a backward pass should produce.
struct GradientRequest {
  bool parameters = true;
  std::vector<bool> inputs;  // per branch; missing entries mean "not needed"

  static GradientRequest params_only() { return {true, {}}; }
  bool wants_input(std::size_t branch) const {
    return branch < inputs.size() && inputs[branch];
  }
};

class Network {
 public:
  Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    if (spec_.branches.empty()) throw std::invalid_argument("network needs >= 1 branch");
    if (spec_.trunk.empty()) throw std::invalid_argument("network needs a trunk");
    std::size_t merged = 0;
    for (const auto& b : spec_.branches) {
      Branch br;
      br.input_size = shape_size(b.input_shape);
      Shape shape = b.input_shape;
      for (const auto& ls : b.layers) {
        try {
          br.layers.emplace_back(ls, shape);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("branch '" + b.name + "': " + e.what());
        }
        shape = br.layers.back().output_shape();
      }
      br.output_size = shape_size(shape);
      br.offset = merged;
      merged += br.output_size;
      branches_.push_back(std::move(br));
    }
    Shape shape{merged};
    for (const auto& ls : spec_.trunk) {
      if (ls.kind != LayerKind::dense) {
        throw std::invalid_argument("trunk layers must be dense");
      }
      trunk_.emplace_back(ls, shape);
      shape = trunk_.back().output_shape();
    }
    merged_.assign(merged, 0.0);
    std::mt19937_64 rng(seed);
    for (auto& br : branches_) {
      for (auto& l : br.layers) l.initialize(rng);
    }
    for (auto& l : trunk_) l.initialize(rng);
  }

  const NetworkSpec& spec() const { return spec_; }
  std::uint64_t hash() const { return spec_hash(spec_); }
  std::size_t output_size() const { return trunk_.back().output_shape()[0]; }
  std::size_t branch_count() const { return branches_.size(); }

  // Caches activations for a following backward().
  const Tensor& forward(std::span<const Tensor> inputs) {
    check_inputs(inputs);
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      auto& br = branches_[b];
      std::span<const double> x = inputs[b].data();
      br.input.assign(x.begin(), x.end());
      for (auto& l : br.layers) x = l.forward(x).data();
      std::copy(x.begin(), x.end(), merged_.begin() + static_cast<std::ptrdiff_t>(br.offset));
    }
    std::span<const double> x = merged_;
    for (auto& l : trunk_) x = l.forward(x).data();
    has_forward_ = true;
    return trunk_.back().output();
  }

  const Tensor& forward(std::initializer_list<Tensor> inputs) {
    return forward(std::span<const Tensor>(inputs.begin(), inputs.size()));
  }

  // Stateless inference; safe to call concurrently on a const network.
  Tensor predict(std::span<const Tensor> inputs) const {
    check_inputs(inputs);
    std::vector<double> merged(merged_.size());
    std::vector<double> cur, pre, out;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const auto& br = branches_[b];
      cur.assign(inputs[b].data().begin(), inputs[b].data().end());
      for (const auto& l : br.layers) {
        const std::size_t n = shape_size(l.output_shape());
        pre.resize(n);
        out.resize(n);
        l.compute(cur, pre, out);
        cur.swap(out);
      }
      std::copy(cur.begin(), cur.end(), merged.begin() + static_cast<std::ptrdiff_t>(br.offset));
    }
    cur = std::move(merged);
    for (const auto& l : trunk_) {
      const std::size_t n = shape_size(l.output_shape());
      pre.resize(n);
      out.resize(n);
      l.compute(cur, pre, out);
      cur.swap(out);
    }
    const std::size_t n = cur.size();
    return Tensor({n}, std::move(cur));
  }

  Tensor predict(std::initializer_list<Tensor> inputs) const {
    return predict(std::span<const Tensor>(inputs.begin(), inputs.size()));
  }

  // Gradient of <output, upstream> for the most recent forward(). Parameter
  // gradients accumulate into the internal buffers; requested input
  // gradients are returned per branch (empty tensors elsewhere).
  std::vector<Tensor> backward(const Tensor& upstream,
                               const GradientRequest& request = {}) {
    if (!has_forward_) {
      throw std::logic_error("backward() requested before any forward()");
    }
    if (upstream.size() != output_size()) {
      throw std::invalid_argument("upstream gradient has " +
                                  std::to_string(upstream.size()) +
                                  " elements, network output has " +
                                  std::to_string(output_size()));
    }
    std::vector<double> d(upstream.data().begin(), upstream.data().end());
    std::vector<double> dnext;
    for (std::size_t i = trunk_.size(); i-- > 0;) {
      dnext.assign(shape_size(trunk_[i].input_shape()), 0.0);
      trunk_[i].backward(d, request.parameters, dnext);
      d.swap(dnext);
    }
    std::vector<Tensor> input_grads(branches_.size());
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      auto& br = branches_[b];
      const bool want_input = request.wants_input(b);
      if (!want_input && (!request.parameters || br.layers.empty())) continue;
      std::vector<double> g(d.begin() + static_cast<std::ptrdiff_t>(br.offset),
                            d.begin() + static_cast<std::ptrdiff_t>(br.offset + br.output_size));
      for (std::size_t i = br.layers.size(); i-- > 0;) {
        const bool need_din = i > 0 || want_input;
        if (need_din) {
          dnext.assign(shape_size(br.layers[i].input_shape()), 0.0);
        } else {
          dnext.clear();
        }
        br.layers[i].backward(g, request.parameters, dnext);
        g.swap(dnext);
      }
      if (want_input) input_grads[b] = Tensor(spec_.branches[b].input_shape, std::move(g));
    }
    return input_grads;
  }

  void zero_grad() {
    for_each_layer([](Layer& l) { l.zero_grad(); });
  }

  // Parameters in declaration order: branches in order, then trunk; each
  // layer contributes weights then bias.
  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for_each_layer([&](Layer& l) {
      out.push_back(&l.weights());
      out.push_back(&l.bias());
    });
    return out;
  }
  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out;
    for_each_layer([&](const Layer& l) {
      out.push_back(&l.weights());
      out.push_back(&l.bias());
    });
    return out;
  }
  std::vector<Tensor*> gradients() {
    std::vector<Tensor*> out;
    for_each_layer([&](Layer& l) {
      out.push_back(&l.grad_weights());
      out.push_back(&l.grad_bias());
    });
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* t : parameters()) n += t->size();
    return n;
  }

  std::vector<double> flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const Tensor* t : parameters()) {
      flat.insert(flat.end(), t->data().begin(), t->data().end());
    }
    return flat;
  }

  void set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
      throw std::invalid_argument("parameter vector has " + std::to_string(flat.size()) +
                                  " values, network has " +
                                  std::to_string(parameter_count()));
    }
    std::size_t k = 0;
    for (Tensor* t : parameters()) {
      for (double& v : t->data()) v = flat[k++];
    }
  }

  Layer& trunk_layer(std::size_t i) { return trunk_.at(i); }
  Layer& branch_layer(std::size_t branch, std::size_t i) {
    return branches_.at(branch).layers.at(i);
  }

 private:
  struct Branch {
    std::vector<Layer> layers;
    std::vector<double> input;
    std::size_t input_size = 0;
    std::size_t output_size = 0;
    std::size_t offset = 0;
  };

  void check_inputs(std::span<const Tensor> inputs) const {
    if (inputs.size() != branches_.size()) {
      throw std::invalid_argument("network expects " + std::to_string(branches_.size()) +
                                  " inputs, got " + std::to_string(inputs.size()));
    }
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const auto& expected = spec_.branches[b].input_shape;
      if (inputs[b].shape() != expected) {
        throw std::invalid_argument("input '" + spec_.branches[b].name +
                                    "' expected shape " + to_string(expected) +
                                    ", got " + to_string(inputs[b].shape()));
      }
    }
  }

  template <class F>
  void for_each_layer(F&& f) {
    for (auto& br : branches_) {
      for (auto& l : br.layers) f(l);
    }
    for (auto& l : trunk_) f(l);
  }
  template <class F>
  void for_each_layer(F&& f) const {
    for (const auto& br : branches_) {
      for (const auto& l : br.layers) f(l);
    }
    for (const auto& l : trunk_) f(l);
  }

  NetworkSpec spec_;
  std::vector<Branch> branches_;
  std::vector<Layer> trunk_;
  std::vector<double> merged_;
  bool has_forward_ = false;
};

// theta' <- tau * theta + (1 - tau) * theta'
inline void soft_update(Network& target, const Network& main, double tau) {
  if (target.hash() != main.hash()) {
    throw std::invalid_argument("soft_update: target and main specs differ");
  }
  auto dst = target.parameters();
  auto src = main.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->shape() != src[i]->shape()) {
      throw std::invalid_argument("soft_update: parameter shape mismatch");
    }
    auto d = dst[i]->data();
    auto s = src[i]->data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = tau * s[k] + (1.0 - tau) * d[k];
  }
}

}  // namespace trackrl
