#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "argrid/io.hpp"
#include "argrid/nll.hpp"

namespace argrid {

/// Bilinear resize with half-pixel centers: src = (dst + 0.5) * in / out - 0.5,
/// clamped to the valid index range.
PlaneX<double> upsample_bilinear(const Eigen::Ref<const PlaneX<double>>& map, Index out_h, Index out_w);

/// Rank-based AUROC with half credit for ties, O(n log n).
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision: step integration over descending distinct thresholds.
double aupr(std::span<const double> scores, std::span<const std::uint8_t> labels);

enum class Pooling { Pooled, PerImage };

Pooling parse_pooling(const std::string& name);

struct EvalReport {
    double auroc = 0.0;
    double aupr = 0.0;
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    std::uint64_t n_images = 0;

    nlohmann::json to_json() const;
};

/// Scores are upsampled to the mask resolution when the grids differ.
EvalReport evaluate(const AnomalyMap<float>& scores, const LabelMasks& labels, Pooling pooling = Pooling::Pooled);

} // namespace argrid
