#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "argrid/model.hpp"

namespace argrid {

struct SuiteResult {
    std::string name;
    bool passed = false;
    Index cases = 0;
    double seconds = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 0;
    Index causality_cases = 100;
    Index oracle_models = 20;
    Index metric_instances = 200;
    Index fixpoint_steps = 1000;
    double gradient_tolerance = 1e-4;
    double metric_tolerance = 1e-12;
};

/// Closed-form mask patterns, the CausalB/CausalA center difference, and
/// strict raster precedence of every kept tap under dilation.
SuiteResult verify_mask_geometry();

/// Randomized perturbation probes. Causal models may only change strictly
/// later positions; single-layer bidirectional models must ignore the
/// perturbed position itself.
/// `extra` (e.g. a loaded checkpoint) is probed in addition to the random models.
SuiteResult verify_causality(const VerifyOptions& options, const ArModel<double>* extra = nullptr);

/// Parallel forward against position-by-position evaluation with two sentinels.
SuiteResult verify_sequential_oracle(const VerifyOptions& options);

/// Analytic loss gradient against central differences on a 2-layer, 8-channel, 6x6 model.
SuiteResult verify_gradients(const VerifyOptions& options);

/// Production AUROC/AUPR against pair counting and threshold sweeping.
SuiteResult verify_metrics(const VerifyOptions& options);

/// Masked weights stay exactly zero under AdamW with random gradients.
SuiteResult verify_masked_fixpoint(const VerifyOptions& options);

/// Bitwise save/load round trip and the distinct load failures.
SuiteResult verify_checkpoint_roundtrip(const VerifyOptions& options);

std::vector<SuiteResult> run_verification(const VerifyOptions& options, const ArModel<double>* extra = nullptr);

/// Relative error with an absolute floor for near-zero gradients.
double gradient_relative_error(double analytic, double numeric);

} // namespace argrid
