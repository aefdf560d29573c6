#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "argrid/mask.hpp"
#include "argrid/model_config.hpp"
#include "argrid/rng.hpp"
#include "argrid/tensor.hpp"

namespace argrid {

/// Per-channel affine standardization applied to inputs before the network.
struct InputNormalization {
    VectorX<double> mean;
    VectorX<double> stddev;

    friend bool operator==(const InputNormalization& a, const InputNormalization& b) {
        return a.mean.size() == b.mean.size() && a.stddev.size() == b.stddev.size() && a.mean == b.mean &&
               a.stddev == b.stddev;
    }
};

/// Stack of masked convolutions predicting the conditional mean grid.
template <typename Scalar>
struct ArModel {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::vector<ConvWeights<Scalar>> params;
    std::vector<KernelMask> masks;
    std::optional<InputNormalization> normalization;

    Index input_channels() const { return config.input_channels(); }
    Index depth() const { return static_cast<Index>(params.size()); }

    Index parameter_count() const {
        Index count = 0;
        for (const auto& p : params) count += p.parameter_count();
        return count;
    }

    template <typename Other>
    ArModel<Other> cast() const {
        ArModel<Other> out;
        out.config = config;
        out.seed = seed;
        out.masks = masks;
        out.normalization = normalization;
        for (const auto& p : params) out.params.push_back(p.template cast<Other>());
        return out;
    }
};

template <typename Scalar>
struct ModelGradients {
    std::vector<VectorX<Scalar>> grad_w;
    std::vector<VectorX<Scalar>> grad_b;
};

/// Cached activations from a training forward pass: activations[0] is the
/// input, activations[l + 1] the output of layer l after its nonlinearity.
template <typename Scalar>
struct ForwardTrace {
    std::vector<Grid4<Scalar>> activations;

    const Grid4<Scalar>& output() const { return activations.back(); }
};

inline std::atomic<std::uint64_t>& forward_counter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

/// Number of full network evaluations performed in this process.
inline std::uint64_t forward_invocations() { return forward_counter().load(); }

/// Weights ~ U(-a, a) with a = 1/sqrt(c_in * unmasked taps); zero biases.
template <typename Scalar>
ArModel<Scalar> init_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ArModel<Scalar> model;
    model.config = config;
    model.seed = seed;
    auto rng = make_rng(seed, Stream::Init);
    for (const auto& spec : config.layers) {
        auto mask = build_mask(spec.mask, spec.k);
        ConvWeights<Scalar> wts(spec.c_out, spec.c_in, spec.k, spec.dilation);
        const Index fan_in = spec.c_in * mask.ones();
        const double bound = fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0;
        for (Index t = 0; t < wts.w.size(); ++t) wts.w[t] = static_cast<Scalar>(uniform(rng, -bound, bound));
        mask_in_place<Scalar>(wts.w, wts, mask);
        model.params.push_back(std::move(wts));
        model.masks.push_back(std::move(mask));
    }
    return model;
}

namespace detail {

template <typename Scalar>
void check_model_input(const ArModel<Scalar>& model, const Grid4<Scalar>& features) {
    require(!model.params.empty(), ErrorCode::InvalidConfig, "model has no layers");
    require(features.channels() == model.input_channels(), ErrorCode::DimensionMismatch,
            "feature grid has " + std::to_string(features.channels()) + " channels, model expects " +
                std::to_string(model.input_channels()));
}

template <typename Scalar>
void relu_in_place(Grid4<Scalar>& g) {
    g.data = g.data.cwiseMax(Scalar(0));
}

} // namespace detail

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const ArModel<Scalar>& model, const Grid4<Scalar>& features) {
    detail::check_model_input(model, features);
    forward_counter().fetch_add(1);
    ForwardTrace<Scalar> trace;
    trace.activations.reserve(model.params.size() + 1);
    trace.activations.push_back(features);
    for (std::size_t l = 0; l < model.params.size(); ++l) {
        auto out = conv2d_forward(trace.activations.back(), model.params[l]);
        if (model.config.layers[l].activation == Activation::Relu) detail::relu_in_place(out);
        trace.activations.push_back(std::move(out));
    }
    return trace;
}

/// Conditional means for every grid position in one parallel pass.
template <typename Scalar>
Grid4<Scalar> forward(const ArModel<Scalar>& model, const Grid4<Scalar>& features) {
    detail::check_model_input(model, features);
    forward_counter().fetch_add(1);
    Grid4<Scalar> h = features;
    for (std::size_t l = 0; l < model.params.size(); ++l) {
        h = conv2d_forward(h, model.params[l]);
        if (model.config.layers[l].activation == Activation::Relu) detail::relu_in_place(h);
    }
    return h;
}

/// Backpropagates dL/dmu through a traced forward pass. Weight gradients at
/// masked taps are reported as exactly zero.
template <typename Scalar>
ModelGradients<Scalar> backward(const ArModel<Scalar>& model, const ForwardTrace<Scalar>& trace,
                                Grid4<Scalar> grad_mu) {
    require(trace.activations.size() == model.params.size() + 1, ErrorCode::DimensionMismatch,
            "trace does not match model depth");
    require(grad_mu.shape == trace.output().shape, ErrorCode::DimensionMismatch,
            "output gradient dims differ from model output dims");
    const std::size_t depth = model.params.size();
    ModelGradients<Scalar> grads;
    grads.grad_w.resize(depth);
    grads.grad_b.resize(depth);
    for (std::size_t l = depth; l-- > 0;) {
        if (model.config.layers[l].activation == Activation::Relu) {
            const auto& out = trace.activations[l + 1].data;
            grad_mu.data = (out.array() > Scalar(0)).select(grad_mu.data, Scalar(0));
        }
        BackwardOptions options;
        options.input_gradient = l > 0;
        options.tap_filter = model.masks[l].m;
        auto g = conv2d_backward(trace.activations[l], model.params[l], grad_mu, options);
        grads.grad_w[l] = std::move(g.grad_w);
        grads.grad_b[l] = std::move(g.grad_b);
        if (l > 0) grad_mu = std::move(g.grad_x);
    }
    return grads;
}

/// Flat index of the first nonzero weight at a masked tap, per layer; nullopt when consistent.
template <typename Scalar>
std::optional<std::pair<std::size_t, Index>> find_mask_violation(const ArModel<Scalar>& model) {
    for (std::size_t l = 0; l < model.params.size(); ++l) {
        const Index at = find_mask_violation(model.params[l], model.masks[l]);
        if (at >= 0) return std::make_pair(l, at);
    }
    return std::nullopt;
}

/// Applies the stored input standardization, if any.
template <typename Scalar>
Grid4<Scalar> normalize_input(const ArModel<Scalar>& model, const Grid4<Scalar>& features) {
    if (!model.normalization) return features;
    const auto& norm = *model.normalization;
    require(norm.mean.size() == features.channels(), ErrorCode::DimensionMismatch,
            "normalization channels differ from feature channels");
    Grid4<Scalar> out = features;
    for (Index n = 0; n < out.batch(); ++n)
        for (Index c = 0; c < out.channels(); ++c) {
            auto p = out.plane(n, c);
            const double mu = norm.mean[c], sd = norm.stddev[c];
            p = ((p.template cast<double>().array() - mu) / sd).template cast<Scalar>().matrix();
        }
    return out;
}

} // namespace argrid
