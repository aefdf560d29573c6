#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "argrid/model.hpp"

namespace argrid {

struct AdamWOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

template <typename Scalar>
struct AdamWMoments {
    VectorX<Scalar> m;
    VectorX<Scalar> v;

    explicit AdamWMoments(Index size = 0) : m(VectorX<Scalar>::Zero(size)), v(VectorX<Scalar>::Zero(size)) {}
};

/// One decoupled-weight-decay Adam update of a flat parameter block at step
/// `t` (t >= 1, already incremented).
template <typename Scalar>
void adamw_update(std::type_identity_t<Eigen::Ref<VectorX<Scalar>>> w,
                  std::type_identity_t<Eigen::Ref<const VectorX<Scalar>>> g, AdamWMoments<Scalar>& moments,
                  const AdamWOptions& opt, std::uint64_t t) {
    require(w.size() == g.size() && w.size() == moments.m.size() && w.size() == moments.v.size(),
            ErrorCode::DimensionMismatch, "adamw parameter, gradient and moment sizes differ");
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
    for (Index i = 0; i < w.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        const double m = opt.beta1 * static_cast<double>(moments.m[i]) + (1.0 - opt.beta1) * gi;
        const double v = opt.beta2 * static_cast<double>(moments.v[i]) + (1.0 - opt.beta2) * gi * gi;
        moments.m[i] = static_cast<Scalar>(m);
        moments.v[i] = static_cast<Scalar>(v);
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        const double wi = static_cast<double>(w[i]);
        w[i] = static_cast<Scalar>(wi - opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps) - opt.lr * opt.weight_decay * wi);
    }
}

/// Optimizer state for a whole model: one moment pair per weight and bias tensor.
template <typename Scalar>
struct AdamWState {
    AdamWOptions options;
    std::uint64_t step = 0;
    std::vector<AdamWMoments<Scalar>> weights;
    std::vector<AdamWMoments<Scalar>> biases;

    AdamWState() = default;
    AdamWState(const ArModel<Scalar>& model, AdamWOptions opt) : options(opt) {
        for (const auto& p : model.params) {
            weights.emplace_back(p.w.size());
            biases.emplace_back(p.b.size());
        }
    }
};

/// Applies one AdamW step to every layer, then re-imposes the kernel masks.
template <typename Scalar>
void adamw_step(ArModel<Scalar>& model, const ModelGradients<Scalar>& grads, AdamWState<Scalar>& state) {
    const std::size_t depth = model.params.size();
    require(grads.grad_w.size() == depth && grads.grad_b.size() == depth && state.weights.size() == depth &&
                state.biases.size() == depth,
            ErrorCode::DimensionMismatch, "gradient or optimizer state depth differs from model depth");
    ++state.step;
    for (std::size_t l = 0; l < depth; ++l) {
        auto& p = model.params[l];
        adamw_update<Scalar>(p.w, grads.grad_w[l], state.weights[l], state.options, state.step);
        adamw_update<Scalar>(p.b, grads.grad_b[l], state.biases[l], state.options, state.step);
        mask_in_place<Scalar>(p.w, p, model.masks[l]);
    }
}

} // namespace argrid
