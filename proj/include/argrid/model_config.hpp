#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "argrid/mask.hpp"

namespace argrid {

enum class Activation { Relu, None };

struct LayerSpec {
    Index c_in = 0;
    Index c_out = 0;
    Index k = 3;
    Index dilation = 1;
    MaskKind mask = MaskKind::CausalB;
    Activation activation = Activation::Relu;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelConfig {
    std::vector<LayerSpec> layers;

    /// Throws InvalidConfig naming the first violated rule.
    void validate() const;

    Index input_channels() const { return layers.empty() ? 0 : layers.front().c_in; }
    /// True when every layer keeps the raster-order factorization.
    bool causal() const;
    Index parameter_count() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Uniform stack: `depth` layers of width `hidden`, mapping `dim` channels back to `dim`.
struct StackOptions {
    Index dim = 384;
    Index hidden = 384;
    Index depth = 5;
    Index k = 3;
    Index dilation = 1;
    bool bidirectional = false;
};

ModelConfig make_stack_config(const StackOptions& options);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Accepts either {"layers": [...]} or {"stack": {...}} with StackOptions fields.
ModelConfig parse_model_section(const nlohmann::json& j);

} // namespace argrid
