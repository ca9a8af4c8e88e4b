// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmist/backends.hpp"
#include "mmist/core_types.hpp"
#include "mmist/styleloss.hpp"

namespace mmist {

// Cross-modal GAN inversion: candidate-sampled initialization followed by
// Adam-driven minimization of the style loss over the extended latent space.

struct InversionTrace {
    std::vector<std::pair<int, double>> per_step;  // (step, loss before update)
    double init_loss = 0.0;                        // loss at the selected initialization
    double wallclock_s = 0.0;
};

/// Line-oriented rendering for convergence plots (one "step=... loss=..."
/// line per step).
std::string format_trace(const InversionTrace& trace);

/// A step produced a NaN/Inf loss; the partial trace travels with the error.
struct NonFiniteLossError : Error {
    explicit NonFiniteLossError(InversionTrace t)
        : Error("non-finite style loss during inversion"), trace(std::move(t)) {}
    InversionTrace trace;
};

using StepLogger = std::function<void(const std::string& line)>;

/// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamOptimizer {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void step(std::vector<double>& x, const std::vector<double>& grad, double lr);

    std::vector<double> m, v;
    long t = 0;
};

/// Samples cfg.init_candidates mapped latents and returns the argmin of the
/// style loss over them, all candidates scored under one shared patch seed.
/// Ties break toward the lowest candidate index.
LatentCode initialize_latent(const InversionConfig& cfg, const GeneratorBackend& generator,
                             const StyleLossEvaluator& loss, double* best_loss = nullptr);

struct InversionResult {
    StyleRepresentation representation;
    InversionTrace trace;
};

/// Algorithm: initialize, then cfg.iterations Adam steps on w (optionally
/// early-stopped), returning the synthesis of the final latent.
InversionResult invert(const StyleSpec& spec, const InversionConfig& cfg,
                       const PatchConfig& patch_cfg, const LossConfig& loss_cfg,
                       const GeneratorBackend& generator, const EmbedderBackend& embedder,
                       const StepLogger& log = {});

/// Multi-style boosting: n_styles independent inversions under derived seeds,
/// ordered by run index.
std::vector<InversionResult> invert_many(const StyleSpec& spec, const BoostConfig& boost,
                                         const InversionConfig& cfg, const PatchConfig& patch_cfg,
                                         const LossConfig& loss_cfg,
                                         const GeneratorBackend& generator,
                                         const EmbedderBackend& embedder,
                                         const StepLogger& log = {});

}  // namespace mmist
