#include "relrank/nn.hpp"

#include <cmath>
#include <cstdlib>

namespace relrank::nn {

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw ConfigError("unknown activation: " + s);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "linear";
}

Real sigmoid(Real x) {
    // Split on sign to avoid overflow in exp.
    if (x >= Real(0)) {
        const Real z = std::exp(-x);
        return Real(1) / (Real(1) + z);
    }
    const Real z = std::exp(x);
    return z / (Real(1) + z);
}

void relu_inplace(Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < Real(0)) t[i] = Real(0);
    }
}

void sigmoid_inplace(Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = sigmoid(t[i]);
}

void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<Real>(rng.uniform(-bound, bound));
    }
}

namespace {

void apply_activation(Tensor& t, Activation act) {
    switch (act) {
        case Activation::Linear: break;
        case Activation::Relu: relu_inplace(t); break;
        case Activation::Sigmoid: sigmoid_inplace(t); break;
    }
}

// Derivative expressed through the post-activation output.
Real activation_grad_from_output(Real y, Activation act) {
    switch (act) {
        case Activation::Linear: return Real(1);
        case Activation::Relu: return y > Real(0) ? Real(1) : Real(0);
        case Activation::Sigmoid: return y * (Real(1) - y);
    }
    return Real(1);
}

} // namespace

// --- DenseLayer -------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      act_(act),
      weights_({out_dim, in_dim}),
      bias_({out_dim}) {}

void DenseLayer::init(Rng& rng) {
    glorot_init(weights_.value, in_dim_, out_dim_, rng);
    bias_.value.zero();
}

Tensor DenseLayer::forward(const Tensor& x) {
    if (x.rank() != 2 || x.extent(1) != in_dim_) {
        throw DimensionError("dense forward: expected (batch, " +
                             std::to_string(in_dim_) + ") input");
    }
    const std::size_t batch = x.extent(0);
    Tensor y({batch, out_dim_});
    for (std::size_t b = 0; b < batch; ++b) {
        const Real* xb = x.data() + b * in_dim_;
        for (std::size_t o = 0; o < out_dim_; ++o) {
            const Real* w = weights_.value.data() + o * in_dim_;
            Real acc = bias_.value[o];
            for (std::size_t i = 0; i < in_dim_; ++i) acc += w[i] * xb[i];
            y.at(b, o) = acc;
        }
    }
    apply_activation(y, act_);
    debug_check_finite(y, "dense forward");
    input_ = x;
    output_ = y;
    return y;
}

Tensor DenseLayer::backward(const Tensor& dy) {
    dy.require_shape(output_, "dense backward");
    const std::size_t batch = dy.extent(0);
    Tensor dx({batch, in_dim_});
    for (std::size_t b = 0; b < batch; ++b) {
        const Real* xb = input_.data() + b * in_dim_;
        Real* dxb = dx.data() + b * in_dim_;
        for (std::size_t o = 0; o < out_dim_; ++o) {
            const Real dpre =
                dy.at(b, o) * activation_grad_from_output(output_.at(b, o), act_);
            if (dpre == Real(0)) continue;
            Real* wg = weights_.grad.data() + o * in_dim_;
            const Real* w = weights_.value.data() + o * in_dim_;
            for (std::size_t i = 0; i < in_dim_; ++i) {
                wg[i] += dpre * xb[i];
                dxb[i] += dpre * w[i];
            }
            bias_.grad[o] += dpre;
        }
    }
    debug_check_finite(dx, "dense backward");
    return dx;
}

void DenseLayer::collect_params(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".weight", &weights_});
    out.push_back({prefix + ".bias", &bias_});
}

// --- Conv1dLayer -------------------------------------------------------------

Conv1dLayer::Conv1dLayer(std::size_t in_channels, std::size_t filters, std::size_t window)
    : in_channels_(in_channels),
      filters_(filters),
      window_(window),
      filters_param_({filters, window, in_channels}),
      bias_({filters}) {
    if (window_ == 0) throw DimensionError("conv1d: window must be positive");
}

std::size_t Conv1dLayer::out_length(std::size_t t, std::size_t w) {
    return t - w + 1;
}

void Conv1dLayer::init(Rng& rng) {
    glorot_init(filters_param_.value, in_channels_ * window_, filters_ * window_, rng);
    bias_.value.zero();
}

Tensor Conv1dLayer::forward(const Tensor& x) {
    if (x.rank() != 3 || x.extent(1) != in_channels_) {
        throw DimensionError("conv1d forward: expected (batch, " +
                             std::to_string(in_channels_) + ", T) input");
    }
    const std::size_t t_len = x.extent(2);
    if (t_len < window_) {
        throw DimensionError("conv1d forward: series length " + std::to_string(t_len) +
                             " shorter than window " + std::to_string(window_));
    }
    const std::size_t batch = x.extent(0);
    const std::size_t out_len = out_length(t_len, window_);
    Tensor y({batch, filters_, out_len});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t f = 0; f < filters_; ++f) {
            for (std::size_t k = 0; k < out_len; ++k) {
                Real acc = bias_.value[f];
                for (std::size_t tau = 0; tau < window_; ++tau) {
                    for (std::size_t d = 0; d < in_channels_; ++d) {
                        acc += filters_param_.value.at(f, tau, d) * x.at(b, d, k + tau);
                    }
                }
                y.at(b, f, k) = acc;
            }
        }
    }
    debug_check_finite(y, "conv1d forward");
    input_ = x;
    return y;
}

Tensor Conv1dLayer::backward(const Tensor& dy) {
    const std::size_t batch = input_.extent(0);
    const std::size_t t_len = input_.extent(2);
    const std::size_t out_len = out_length(t_len, window_);
    if (dy.rank() != 3 || dy.extent(0) != batch || dy.extent(1) != filters_ ||
        dy.extent(2) != out_len) {
        throw DimensionError("conv1d backward: upstream shape mismatch");
    }
    Tensor dx({batch, in_channels_, t_len});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t f = 0; f < filters_; ++f) {
            for (std::size_t k = 0; k < out_len; ++k) {
                const Real g = dy.at(b, f, k);
                if (g == Real(0)) continue;
                bias_.grad[f] += g;
                for (std::size_t tau = 0; tau < window_; ++tau) {
                    for (std::size_t d = 0; d < in_channels_; ++d) {
                        filters_param_.grad.at(f, tau, d) += g * input_.at(b, d, k + tau);
                        dx.at(b, d, k + tau) += g * filters_param_.value.at(f, tau, d);
                    }
                }
            }
        }
    }
    debug_check_finite(dx, "conv1d backward");
    return dx;
}

void Conv1dLayer::collect_params(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".filters", &filters_param_});
    out.push_back({prefix + ".bias", &bias_});
}

// --- BatchNormLayer -----------------------------------------------------------

BatchNormLayer::BatchNormLayer(std::size_t channels, Real eps, Real momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      scale_({channels}),
      shift_({channels}),
      running_mean_({channels}, Real(0)),
      running_var_({channels}, Real(1)) {
    scale_.value.fill(Real(1));
    shift_.value.zero();
}

namespace {

// Iterates the (batch, C) or (batch, C, L) cells belonging to channel c.
template <typename Fn>
void for_channel(const Tensor& x, std::size_t c, Fn&& fn) {
    const std::size_t batch = x.extent(0);
    if (x.rank() == 2) {
        for (std::size_t b = 0; b < batch; ++b) fn(b * x.extent(1) + c);
    } else {
        const std::size_t len = x.extent(2);
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t base = (b * x.extent(1) + c) * len;
            for (std::size_t l = 0; l < len; ++l) fn(base + l);
        }
    }
}

std::size_t cells_per_channel(const Tensor& x) {
    return x.rank() == 2 ? x.extent(0) : x.extent(0) * x.extent(2);
}

} // namespace

Tensor BatchNormLayer::forward(const Tensor& x, Mode mode) {
    if ((x.rank() != 2 && x.rank() != 3) || x.extent(1) != channels_) {
        throw DimensionError("batchnorm forward: expected (batch, C[, L]) with C = " +
                             std::to_string(channels_));
    }
    Tensor y(x.shape());
    if (mode == Mode::Inference) {
        for (std::size_t c = 0; c < channels_; ++c) {
            const Real inv = Real(1) / std::sqrt(running_var_[c] + eps_);
            const Real a = scale_.value[c] * inv;
            const Real b = shift_.value[c] - a * running_mean_[c];
            for_channel(x, c, [&](std::size_t i) { y[i] = a * x[i] + b; });
        }
        trained_forward_ = false;
        debug_check_finite(y, "batchnorm forward");
        return y;
    }

    const std::size_t n = cells_per_channel(x);
    if (n < 2) {
        throw DimensionError(
            "batchnorm forward: training mode needs at least 2 samples per channel "
            "(variance undefined for a batch of 1)");
    }
    batch_mean_.assign(channels_, Real(0));
    batch_var_.assign(channels_, Real(0));
    normalized_ = Tensor(x.shape());
    for (std::size_t c = 0; c < channels_; ++c) {
        Real sum = 0;
        for_channel(x, c, [&](std::size_t i) { sum += x[i]; });
        const Real mean = sum / static_cast<Real>(n);
        Real var_sum = 0;
        for_channel(x, c, [&](std::size_t i) {
            const Real d = x[i] - mean;
            var_sum += d * d;
        });
        const Real var = var_sum / static_cast<Real>(n);
        batch_mean_[c] = mean;
        batch_var_[c] = var;
        running_mean_[c] = (Real(1) - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (Real(1) - momentum_) * running_var_[c] + momentum_ * var;
        const Real inv = Real(1) / std::sqrt(var + eps_);
        for_channel(x, c, [&](std::size_t i) {
            normalized_[i] = (x[i] - mean) * inv;
            y[i] = scale_.value[c] * normalized_[i] + shift_.value[c];
        });
    }
    input_ = x;
    trained_forward_ = true;
    debug_check_finite(y, "batchnorm forward");
    return y;
}

Tensor BatchNormLayer::backward(const Tensor& dy) {
    if (!trained_forward_) {
        throw DimensionError("batchnorm backward: requires a Training-mode forward");
    }
    dy.require_shape(input_, "batchnorm backward");
    const std::size_t n = cells_per_channel(input_);
    const Real inv_n = Real(1) / static_cast<Real>(n);
    Tensor dx(input_.shape());
    for (std::size_t c = 0; c < channels_; ++c) {
        const Real inv_std = Real(1) / std::sqrt(batch_var_[c] + eps_);
        Real sum_dy = 0;
        Real sum_dy_xhat = 0;
        for_channel(dy, c, [&](std::size_t i) {
            sum_dy += dy[i];
            sum_dy_xhat += dy[i] * normalized_[i];
        });
        scale_.grad[c] += sum_dy_xhat;
        shift_.grad[c] += sum_dy;
        const Real g = scale_.value[c];
        for_channel(dy, c, [&](std::size_t i) {
            // Standard batch-norm backward, fused form.
            dx[i] = g * inv_std *
                    (dy[i] - inv_n * sum_dy - normalized_[i] * inv_n * sum_dy_xhat);
        });
    }
    debug_check_finite(dx, "batchnorm backward");
    return dx;
}

void BatchNormLayer::collect_params(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".scale", &scale_});
    out.push_back({prefix + ".shift", &shift_});
}

void BatchNormLayer::collect_state(const std::string& prefix, std::vector<NamedTensor>& out) {
    out.push_back({prefix + ".running_mean", &running_mean_});
    out.push_back({prefix + ".running_var", &running_var_});
}

// --- DropoutLayer -------------------------------------------------------------

DropoutLayer::DropoutLayer(Real rate) : rate_(rate) {
    if (rate < Real(0) || rate >= Real(1)) {
        throw ConfigError("dropout rate must be in [0, 1)");
    }
}

Tensor DropoutLayer::forward(const Tensor& x, Mode mode, Rng& rng) {
    if (mode == Mode::Inference || rate_ == Real(0)) {
        identity_ = true;
        return x;
    }
    identity_ = false;
    mask_ = Tensor(x.shape());
    const Real keep = Real(1) - rate_;
    const Real scale = Real(1) / keep;
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mask_[i] = rng.bernoulli(keep) ? scale : Real(0);
        y[i] = x[i] * mask_[i];
    }
    return y;
}

Tensor DropoutLayer::backward(const Tensor& dy) const {
    if (identity_) return dy;
    dy.require_shape(mask_, "dropout backward");
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
    return dx;
}

// --- EmbeddingTable -----------------------------------------------------------

EmbeddingTable::EmbeddingTable(std::size_t vocab, std::size_t dim)
    : vocab_(vocab), dim_(dim), table_({vocab, dim}) {}

void EmbeddingTable::init(Rng& rng) {
    glorot_init(table_.value, vocab_, dim_, rng);
}

Tensor EmbeddingTable::lookup(std::span<const std::size_t> indices) const {
    Tensor y({indices.size(), dim_});
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= vocab_) {
            throw DimensionError("embedding lookup: index " + std::to_string(indices[r]) +
                                 " out of range");
        }
        const Real* row = table_.value.data() + indices[r] * dim_;
        Real* out = y.data() + r * dim_;
        for (std::size_t j = 0; j < dim_; ++j) out[j] = row[j];
    }
    return y;
}

void EmbeddingTable::accumulate_grad(std::span<const std::size_t> indices, const Tensor& dy) {
    if (dy.rank() != 2 || dy.extent(0) != indices.size() || dy.extent(1) != dim_) {
        throw DimensionError("embedding accumulate_grad: upstream shape mismatch");
    }
    for (std::size_t r = 0; r < indices.size(); ++r) {
        Real* g = table_.grad.data() + indices[r] * dim_;
        const Real* d = dy.data() + r * dim_;
        for (std::size_t j = 0; j < dim_; ++j) g[j] += d[j];
    }
}

void EmbeddingTable::collect_params(const std::string& prefix, std::vector<NamedParam>& out) {
    out.push_back({prefix + ".table", &table_});
}

// --- Adam ---------------------------------------------------------------------

void adam_step(std::span<const NamedParam> params, const AdamConfig& cfg,
               std::uint64_t step) {
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg.beta1), static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg.beta2), static_cast<double>(step));
    for (const NamedParam& np : params) {
        Parameter& p = *np.param;
        if (p.moment1.size() != p.value.size()) {
            p.moment1 = Tensor(p.value.shape());
            p.moment2 = Tensor(p.value.shape());
        }
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = static_cast<double>(p.grad[i]);
            const double m = cfg.beta1 * p.moment1[i] + (1.0 - cfg.beta1) * g;
            const double v = cfg.beta2 * p.moment2[i] + (1.0 - cfg.beta2) * g * g;
            p.moment1[i] = static_cast<Real>(m);
            p.moment2[i] = static_cast<Real>(v);
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            p.value[i] -= static_cast<Real>(cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
        }
        p.grad.zero();
    }
}

// --- finite differences ---------------------------------------------------------

GradCheckResult grad_check(const std::function<Real()>& forward,
                           const std::function<void()>& backprop,
                           std::span<const GradSlot> slots, Real eps) {
    for (const GradSlot& s : slots) s.grad->zero();
    backprop();

    GradCheckResult result;
    for (const GradSlot& s : slots) {
        for (std::size_t i = 0; i < s.value->size(); ++i) {
            const Real orig = (*s.value)[i];
            (*s.value)[i] = orig + eps;
            const double up = static_cast<double>(forward());
            (*s.value)[i] = orig - eps;
            const double down = static_cast<double>(forward());
            (*s.value)[i] = orig;
            const double numeric = (up - down) / (2.0 * static_cast<double>(eps));
            const double analytic = static_cast<double>((*s.grad)[i]);
            const double scale = std::max(std::abs(numeric), std::abs(analytic));
            const double err =
                scale < 1e-8 ? std::abs(numeric - analytic)
                             : std::abs(numeric - analytic) / scale;
            if (err > result.max_rel_err) {
                result.max_rel_err = err;
                result.worst_slot = s.name;
                result.worst_index = i;
            }
        }
    }
    return result;
}

std::vector<GradSlot> slots_of(std::span<const NamedParam> params) {
    std::vector<GradSlot> slots;
    slots.reserve(params.size());
    for (const NamedParam& np : params) {
        slots.push_back({np.name, &np.param->value, &np.param->grad});
    }
    return slots;
}

} // namespace relrank::nn
