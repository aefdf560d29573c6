#pragma once

// Slow reference computations used to validate the production paths. They
// share no arithmetic with the code they check beyond calling forward().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "argrid/model.hpp"

namespace argrid::oracle {

template <typename Scalar>
struct SequentialResult {
    Grid4<Scalar> mu;               // assembled with the zero sentinel
    Grid4<Scalar> mu_alt_sentinel;  // assembled with the large sentinel
    double sentinel_gap = 0.0;      // max |mu - mu_alt_sentinel|
};

/// Position-by-position evaluation: for every (i, j) the grid is overwritten
/// from (i, j) onward with a sentinel, the full network is run, and only
/// mu[i, j] is kept. Undefined for non-causal models.
template <typename Scalar>
SequentialResult<Scalar> sequential_forward(const ArModel<Scalar>& model, const Grid4<Scalar>& features,
                                            Scalar big_sentinel = Scalar(1e6)) {
    require(model.config.causal(), ErrorCode::InvalidConfig, "sequential oracle needs a causal model");
    SequentialResult<Scalar> result{Grid4<Scalar>(Shape4{features.batch(), model.config.layers.back().c_out,
                                                         features.rows(), features.cols()}),
                                    Grid4<Scalar>(Shape4{features.batch(), model.config.layers.back().c_out,
                                                         features.rows(), features.cols()}),
                                    0.0};
    const Index H = features.rows(), W = features.cols();
    for (const Scalar sentinel : {Scalar(0), big_sentinel}) {
        auto& target = sentinel == Scalar(0) ? result.mu : result.mu_alt_sentinel;
        for (Index i = 0; i < H; ++i)
            for (Index j = 0; j < W; ++j) {
                Grid4<Scalar> hidden = features;
                for (Index n = 0; n < hidden.batch(); ++n)
                    for (Index c = 0; c < hidden.channels(); ++c)
                        for (Index ii = 0; ii < H; ++ii)
                            for (Index jj = 0; jj < W; ++jj)
                                if (!raster_precedes(ii, jj, i, j)) hidden(n, c, ii, jj) = sentinel;
                const auto mu = forward(model, hidden);
                for (Index n = 0; n < mu.batch(); ++n)
                    for (Index c = 0; c < mu.channels(); ++c) target(n, c, i, j) = mu(n, c, i, j);
            }
    }
    result.sentinel_gap =
        (result.mu.data.template cast<double>() - result.mu_alt_sentinel.data.template cast<double>())
            .cwiseAbs()
            .maxCoeff();
    return result;
}

/// Positions (row-major H*W flags) whose prediction changes when the input at
/// (qi, qj) is perturbed by `delta` in every channel.
template <typename Scalar>
std::vector<std::uint8_t> dependence_probe(const ArModel<Scalar>& model, const Grid4<Scalar>& features, Index qi,
                                           Index qj, Scalar delta = Scalar(1)) {
    const auto base = forward(model, features);
    Grid4<Scalar> moved = features;
    for (Index n = 0; n < moved.batch(); ++n)
        for (Index c = 0; c < moved.channels(); ++c) moved(n, c, qi, qj) += delta;
    const auto shifted = forward(model, moved);
    std::vector<std::uint8_t> changed(static_cast<std::size_t>(features.plane_size()), 0);
    for (Index n = 0; n < base.batch(); ++n)
        for (Index c = 0; c < base.channels(); ++c)
            for (Index i = 0; i < base.rows(); ++i)
                for (Index j = 0; j < base.cols(); ++j)
                    if (base(n, c, i, j) != shifted(n, c, i, j))
                        changed[static_cast<std::size_t>(i * base.cols() + j)] = 1;
    return changed;
}

/// Central differences (f(w + h) - f(w - h)) / 2h for every coordinate.
template <typename LossFn>
VectorX<double> fd_gradient(LossFn&& loss, const VectorX<double>& params, double step) {
    VectorX<double> grad(params.size());
    VectorX<double> probe = params;
    for (Index k = 0; k < params.size(); ++k) {
        probe[k] = params[k] + step;
        const double up = loss(probe);
        probe[k] = params[k] - step;
        const double down = loss(probe);
        probe[k] = params[k];
        require(std::isfinite(up) && std::isfinite(down), ErrorCode::NonFinite,
                "loss is not finite at coordinate " + std::to_string(k));
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

inline void check_labels(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    require(scores.size() == labels.size(), ErrorCode::DimensionMismatch, "scores and labels differ in length");
}

/// Mann-Whitney pair counting: ties earn half credit.
inline double pairwise_auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_labels(scores, labels);
    double credit = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t p = 0; p < scores.size(); ++p) {
        if (!labels[p]) continue;
        for (std::size_t q = 0; q < scores.size(); ++q) {
            if (labels[q]) continue;
            ++pairs;
            if (scores[p] > scores[q])
                credit += 1.0;
            else if (scores[p] == scores[q])
                credit += 0.5;
        }
    }
    require(pairs > 0, ErrorCode::DegenerateLabels, "AUROC needs both positive and negative labels");
    return credit / static_cast<double>(pairs);
}

/// Average precision by sweeping every distinct score as a threshold.
inline double stepwise_ap(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_labels(scores, labels);
    double positives = 0;
    for (auto l : labels) positives += l;
    require(positives > 0, ErrorCode::DegenerateLabels, "AP needs at least one positive label");
    std::vector<double> thresholds(scores.begin(), scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double ap = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0, selected = 0;
        for (std::size_t k = 0; k < scores.size(); ++k)
            if (scores[k] >= t) {
                selected += 1;
                tp += labels[k];
            }
        const double recall = tp / positives;
        ap += (recall - prev_recall) * (tp / selected);
        prev_recall = recall;
    }
    return ap;
}

} // namespace argrid::oracle
