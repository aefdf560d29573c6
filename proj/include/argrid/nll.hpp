#pragma once

#include <cmath>
#include <numbers>

#include "argrid/model.hpp"
#include "argrid/tensor.hpp"

namespace argrid {

/// Per-position anomaly scores for a batch of images, (N, H, W) row-major.
template <typename Scalar>
struct AnomalyMap {
    Index n = 0;
    Index h = 0;
    Index w = 0;
    VectorX<Scalar> scores;

    AnomalyMap() = default;
    AnomalyMap(Index images, Index rows, Index cols)
        : n(images), h(rows), w(cols), scores(VectorX<Scalar>::Zero(images * rows * cols)) {}

    Scalar& operator()(Index img, Index i, Index j) { return scores[(img * h + i) * w + j]; }
    Scalar operator()(Index img, Index i, Index j) const { return scores[(img * h + i) * w + j]; }

    Eigen::Map<const PlaneX<Scalar>> image(Index img) const {
        return Eigen::Map<const PlaneX<Scalar>>(scores.data() + img * h * w, h, w);
    }
};

/// (D/2) log(2 pi): the score of a perfectly predicted D-dimensional position.
inline double gaussian_log_normalizer(Index dim) {
    return 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
}

/// Conditional NLL of each position under N(mu, I).
template <typename Scalar>
AnomalyMap<Scalar> nll_map(const Grid4<Scalar>& features, const Grid4<Scalar>& mu) {
    require(features.shape == mu.shape, ErrorCode::DimensionMismatch,
            "features " + to_string(features.shape) + " and means " + to_string(mu.shape) + " differ");
    const Index P = features.plane_size();
    const double constant = gaussian_log_normalizer(features.channels());
    AnomalyMap<Scalar> map(features.batch(), features.rows(), features.cols());
    std::vector<double> sq(static_cast<std::size_t>(P));
    for (Index n = 0; n < features.batch(); ++n) {
        std::fill(sq.begin(), sq.end(), 0.0);
        for (Index c = 0; c < features.channels(); ++c) {
            const Scalar* f = features.plane_data(n, c);
            const Scalar* m = mu.plane_data(n, c);
            for (Index t = 0; t < P; ++t) {
                const double d = static_cast<double>(f[t]) - static_cast<double>(m[t]);
                sq[static_cast<std::size_t>(t)] += d * d;
            }
        }
        for (Index t = 0; t < P; ++t)
            map.scores[n * P + t] = static_cast<Scalar>(0.5 * sq[static_cast<std::size_t>(t)] + constant);
    }
    return map;
}

/// Sum of per-position NLL for each image, in double.
template <typename Scalar>
VectorX<double> image_nll(const Grid4<Scalar>& features, const Grid4<Scalar>& mu) {
    require(features.shape == mu.shape, ErrorCode::DimensionMismatch, "features and means differ in shape");
    const double constant = gaussian_log_normalizer(features.channels()) * static_cast<double>(features.plane_size());
    VectorX<double> out(features.batch());
    for (Index n = 0; n < features.batch(); ++n) {
        const auto diff = (features.image(n).template cast<double>() - mu.image(n).template cast<double>()).eval();
        out[n] = 0.5 * diff.squaredNorm() + constant;
    }
    return out;
}

/// Training objective: mean over images of the summed per-position NLL.
template <typename Scalar>
double nll_loss(const Grid4<Scalar>& features, const Grid4<Scalar>& mu) {
    require(features.batch() > 0, ErrorCode::EmptyInput, "loss of an empty batch");
    return image_nll(features, mu).mean();
}

/// d loss / d mu = (mu - F) / N.
template <typename Scalar>
Grid4<Scalar> nll_loss_gradient(const Grid4<Scalar>& features, const Grid4<Scalar>& mu) {
    require(features.shape == mu.shape, ErrorCode::DimensionMismatch, "features and means differ in shape");
    require(features.batch() > 0, ErrorCode::EmptyInput, "gradient of an empty batch");
    Grid4<Scalar> g(mu.shape);
    const double scale = 1.0 / static_cast<double>(features.batch());
    g.data = ((mu.data.template cast<double>() - features.data.template cast<double>()) * scale).template cast<Scalar>();
    return g;
}

/// Scores every image with exactly one network evaluation each.
template <typename Scalar>
AnomalyMap<Scalar> score_images(const ArModel<Scalar>& model, const Grid4<Scalar>& features) {
    const auto input = normalize_input(model, features);
    AnomalyMap<Scalar> out(input.batch(), input.rows(), input.cols());
    const Index P = input.plane_size();
    for (Index n = 0; n < input.batch(); ++n) {
        const auto one = input.slice(n, 1);
        const auto map = nll_map(one, forward(model, one));
        out.scores.segment(n * P, P) = map.scores;
    }
    return out;
}

} // namespace argrid
