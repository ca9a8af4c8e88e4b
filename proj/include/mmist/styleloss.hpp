// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmist/backends.hpp"
#include "mmist/core_types.hpp"
#include "mmist/patch_pipeline.hpp"

namespace mmist {

// The style-specific loss: directional embeddings, the text-image patch loss,
// the image-image patch loss, and their weighted sum. Differentiable w.r.t.
// the style-image pixels whenever the embedder provides gradients.

struct LossConfig {
    std::string src_text = "a photo";
    /// Source image anchor; empty means the bundled default_source_image().
    Image src_image;
    /// Prompt templates averaged in embedding space; empty means the default
    /// eight. "{}" marks the insertion point.
    std::vector<std::string> prompt_templates;
    /// L2-normalize raw embeddings before differencing (flag-switchable, see
    /// the single-identity-template tests for the raw convention).
    bool normalize_embeddings = true;
};

const std::vector<std::string>& default_prompt_templates();
void validate(const LossConfig& cfg);

/// Resolved copy of cfg.src_image (bundled default when empty).
Image resolve_source_image(const LossConfig& cfg);

struct LossBreakdown {
    double total = 0.0;
    std::vector<std::pair<int, double>> per_text;   // (ref index, L_Ti)
    std::vector<std::pair<int, double>> per_image;  // (ref index, L_Ii)
};

/// "key=value ..." line for structured logging.
std::string format_breakdown(const LossBreakdown& b);

/// Embedding direction of `text` against cfg.src_text, averaged over prompt
/// templates.
Direction text_direction(const std::string& text, const LossConfig& cfg,
                         const EmbedderBackend& embedder);

/// One direction per prepared patch against the whole source image; the
/// source embedding is computed once and reused.
std::vector<Direction> patch_directions(const PatchSet& prepared, const LossConfig& cfg,
                                        const EmbedderBackend& embedder);

/// mean_j (1 - cos(style_dir_j, text_dir)), in [0,2].
double text_patch_loss(const std::vector<Direction>& style_dirs, const Direction& text_dir);

/// mean over all j,k pairs of (1 - cos(style_dir_j, ref_dir_k)), in [0,2].
double image_patch_loss(const std::vector<Direction>& style_dirs,
                        const std::vector<Direction>& ref_dirs);

/// Precomputes everything that is constant per (spec, config): text
/// directions, reference patch directions, the source embedding. Immutable
/// after construction; evaluations on distinct images may run concurrently.
class StyleLossEvaluator {
public:
    StyleLossEvaluator(StyleSpec spec, LossConfig loss_cfg, PatchConfig patch_cfg,
                       const EmbedderBackend& embedder, std::uint64_t ref_seed);

    /// Crops/augments the style image under patch_seed and evaluates Eq. 3.
    LossBreakdown evaluate(const Image& style_image, std::uint64_t patch_seed) const;

    /// Same, also accumulating d(total)/d(style image) into grad_image
    /// (allocated by this call).
    LossBreakdown evaluate_with_grad(const Image& style_image, std::uint64_t patch_seed,
                                     Image& grad_image) const;

    /// Patch seed to use for a given optimization step: fixed_patches pins it
    /// to the base seed, otherwise it is derived per step.
    std::uint64_t step_patch_seed(int step) const;

    const StyleSpec& spec() const { return spec_; }
    const PatchConfig& patch_config() const { return patch_cfg_; }
    const EmbedderBackend& embedder() const { return *embedder_; }

private:
    LossBreakdown run(const Image& style_image, std::uint64_t patch_seed,
                      Image* grad_image) const;

    StyleSpec spec_;
    LossConfig loss_cfg_;
    PatchConfig patch_cfg_;
    const EmbedderBackend* embedder_;
    std::uint64_t ref_seed_;
    int dim_ = 0;
    std::vector<double> src_embedding_;            // normalized per config
    std::vector<Direction> text_dirs_;             // one per text ref
    std::vector<std::vector<double>> ref_dirs_;    // per image ref, flat n_crop x dim
};

/// One-shot convenience wrapper around StyleLossEvaluator.
LossBreakdown total_loss(const Image& style_image, const StyleSpec& spec, const LossConfig& cfg,
                         const PatchConfig& patch_cfg, const EmbedderBackend& embedder,
                         std::uint64_t seed);

}  // namespace mmist
