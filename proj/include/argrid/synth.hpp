#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "argrid/io.hpp"
#include "argrid/tensor.hpp"

namespace argrid {

enum class AnomalyKind { NoisePatch, ShufflePatch };

struct SynthConfig {
    Index height = 64;
    Index width = 64;
    Index dim = 16;
    Index smoothing = 2;
    Index n_train = 512;
    Index n_val = 64;
    Index n_test = 64;
    AnomalyKind anomaly = AnomalyKind::NoisePatch;
    Index rect_min = 8;
    Index rect_max = 16;
    std::uint64_t seed = 7;

    void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Spatially smooth normal grid (1, D, H, W); a pure function of (seed, index).
Grid4<float> gen_normal(const SynthConfig& config, std::uint64_t index);

struct InjectedGrid {
    Grid4<float> features;
    std::vector<std::uint8_t> mask;  // H*W, 1 inside the anomalous rectangle
};

/// Replaces one random rectangle with content that breaks local correlation.
InjectedGrid inject_anomaly(const Grid4<float>& features, const SynthConfig& config, std::uint64_t index);

struct SynthDataset {
    Grid4<float> train;
    Grid4<float> val;
    Grid4<float> test;
    LabelMasks test_masks;
};

/// Train, val and test use the disjoint index ranges [0, n_train),
/// [n_train, n_train + n_val) and the remainder.
SynthDataset generate_dataset(const SynthConfig& config);

/// Lag-k autocorrelation along rows and columns of one channel plane.
double lag_autocorrelation(const Eigen::Ref<const PlaneX<float>>& plane, Index lag);

} // namespace argrid
