#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "argrid/model.hpp"
#include "argrid/optim.hpp"

namespace argrid {

struct TrainConfig {
    ModelConfig model;
    AdamWOptions optim;
    Index batch_size = 64;
    Index max_epochs = 200;
    Index eval_every = 1;
    std::uint64_t seed = 0;
    /// Standardize channels with train-set mean/std (stored in the checkpoint).
    bool standardize = false;
    std::filesystem::path train_path;
    std::filesystem::path val_path;
    std::filesystem::path out_dir;

    void validate() const;
};

/// Relative paths in the JSON are resolved against `base_dir`.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct TrainLogRecord {
    Index epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_nll;
    double wall_ms = 0.0;
    bool is_best = false;

    nlohmann::json to_json() const;
};

struct TrainResult {
    ArModel<float> best;
    Index best_epoch = 0;
    double best_val_nll = 0.0;
    std::vector<TrainLogRecord> log;
};

InputNormalization compute_normalization(const Grid4<float>& data);

/// Mean over images of the summed per-position NLL, evaluated in chunks.
double mean_image_nll(const ArModel<float>& model, const Grid4<float>& data, Index chunk = 64);

/// Called after every epoch with the log record and the current parameters.
using EpochCallback = std::function<void(const TrainLogRecord&, const ArModel<float>&)>;

/// Trains on normal grids only and keeps the parameters with the lowest
/// validation NLL. Validation also runs on the final epoch.
TrainResult train(const TrainConfig& config, const Grid4<float>& train_set, const Grid4<float>& val_set,
                  const EpochCallback& on_epoch = {});

/// File-driven variant: writes out_dir/train_log.jsonl and out_dir/best.ckpt
/// (rewritten whenever validation improves).
TrainResult train(const TrainConfig& config);

} // namespace argrid
