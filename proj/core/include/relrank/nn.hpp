#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relrank/rng.hpp"
#include "relrank/tensor.hpp"

namespace relrank::nn {

// Trainable tensor with accumulated gradient and Adam moment slots.
// Moments are sized lazily on the first optimizer step.
struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor moment1;
    Tensor moment2;

    Parameter() = default;
    explicit Parameter(std::vector<std::size_t> shape)
        : value(shape), grad(std::move(shape)) {}

    void zero_grad() { grad.zero(); }
};

struct NamedParam {
    std::string name;
    Parameter* param;
};

struct NamedTensor {
    std::string name;
    Tensor* tensor;
};

enum class Activation { Linear, Relu, Sigmoid };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

Real sigmoid(Real x);
void relu_inplace(Tensor& t);
void sigmoid_inplace(Tensor& t);

// Fills a tensor with samples uniform in +-sqrt(6 / (fan_in + fan_out)).
void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Fully connected layer: y = act(x W^T + b), x is (batch, in).
// Caches the last forward pass for backward().
class DenseLayer {
public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    // Accumulates into parameter grads, returns gradient w.r.t. x.
    Tensor backward(const Tensor& dy);

    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    Activation activation() const { return act_; }
    Parameter& weights() { return weights_; }
    Parameter& bias() { return bias_; }
    void collect_params(const std::string& prefix, std::vector<NamedParam>& out);

private:
    std::size_t in_dim_;
    std::size_t out_dim_;
    Activation act_;
    Parameter weights_; // (out, in)
    Parameter bias_;    // (out)
    Tensor input_;      // cached (batch, in)
    Tensor output_;     // cached post-activation (batch, out)
};

// 1-D convolution over the time axis, no padding, stride 1.
// Input (batch, D, T) -> output (batch, F, T - w + 1).
class Conv1dLayer {
public:
    Conv1dLayer(std::size_t in_channels, std::size_t filters, std::size_t window);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);

    std::size_t in_channels() const { return in_channels_; }
    std::size_t filters() const { return filters_; }
    std::size_t window() const { return window_; }
    static std::size_t out_length(std::size_t t, std::size_t w);
    Parameter& filter_bank() { return filters_param_; }
    Parameter& bias() { return bias_; }
    void collect_params(const std::string& prefix, std::vector<NamedParam>& out);

private:
    std::size_t in_channels_;
    std::size_t filters_;
    std::size_t window_;
    Parameter filters_param_; // (F, w, D)
    Parameter bias_;          // (F)
    Tensor input_;
};

enum class Mode { Training, Inference };

// Batch normalization. 2-D inputs (batch, C) normalize per feature over the
// batch; 3-D inputs (batch, C, L) normalize per channel over batch x length.
// Training mode uses batch statistics and updates the running ones; inference
// uses the running statistics only, making the output a pure affine map.
class BatchNormLayer {
public:
    explicit BatchNormLayer(std::size_t channels, Real eps = Real(1e-5),
                            Real momentum = Real(0.1));

    Tensor forward(const Tensor& x, Mode mode);
    // Only valid after a Training-mode forward.
    Tensor backward(const Tensor& dy);

    std::size_t channels() const { return channels_; }
    Parameter& scale() { return scale_; }
    Parameter& shift() { return shift_; }
    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }
    void collect_params(const std::string& prefix, std::vector<NamedParam>& out);
    void collect_state(const std::string& prefix, std::vector<NamedTensor>& out);

private:
    std::size_t channels_;
    Real eps_;
    Real momentum_;
    Parameter scale_;
    Parameter shift_;
    Tensor running_mean_;
    Tensor running_var_;
    // Cached training-mode forward.
    Tensor input_;
    Tensor normalized_;
    std::vector<Real> batch_mean_;
    std::vector<Real> batch_var_;
    bool trained_forward_ = false;
};

// Inverted dropout: scales kept units by 1/(1-rate) so inference is identity.
class DropoutLayer {
public:
    explicit DropoutLayer(Real rate);

    Tensor forward(const Tensor& x, Mode mode, Rng& rng);
    Tensor backward(const Tensor& dy) const;
    Real rate() const { return rate_; }

private:
    Real rate_;
    Tensor mask_;
    bool identity_ = true;
};

// Row lookup table with scatter-add gradient.
class EmbeddingTable {
public:
    EmbeddingTable(std::size_t vocab, std::size_t dim);

    void init(Rng& rng);
    Tensor lookup(std::span<const std::size_t> indices) const;
    void accumulate_grad(std::span<const std::size_t> indices, const Tensor& dy);

    std::size_t vocab() const { return vocab_; }
    std::size_t dim() const { return dim_; }
    Parameter& table() { return table_; }
    const Parameter& table() const { return table_; }
    void collect_params(const std::string& prefix, std::vector<NamedParam>& out);

private:
    std::size_t vocab_;
    std::size_t dim_;
    Parameter table_; // (vocab, dim)
};

struct AdamConfig {
    Real lr = Real(1e-3);
    Real beta1 = Real(0.9);
    Real beta2 = Real(0.999);
    Real eps = Real(1e-8);
};

// One Adam step with bias correction over all parameters; `step` counts from
// 1. Gradients are zeroed afterwards.
void adam_step(std::span<const NamedParam> params, const AdamConfig& cfg,
               std::uint64_t step);

// --- finite-difference gradient checking -----------------------------------

struct GradSlot {
    std::string name;
    Tensor* value; // perturbed by the checker and restored afterwards
    Tensor* grad;  // analytic gradient produced by `backprop`
};

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_slot;
    std::size_t worst_index = 0;
};

// Central differences on a scalar-valued forward pass. `forward` must be pure
// in the slot values; `backprop` must run forward + backward and leave the
// analytic gradients in the slots. Intended for 64-bit builds.
GradCheckResult grad_check(const std::function<Real()>& forward,
                           const std::function<void()>& backprop,
                           std::span<const GradSlot> slots, Real eps = Real(1e-5));

// Convenience: parameters as grad-check slots.
std::vector<GradSlot> slots_of(std::span<const NamedParam> params);

} // namespace relrank::nn
