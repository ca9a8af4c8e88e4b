// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmist/common.hpp"
#include "mmist/image.hpp"

namespace mmist {

/// Side length every pipeline image is normalized to at ingestion.
constexpr int kImageSide = 512;

// ---------------------------------------------------------------------------
// Style specification
// ---------------------------------------------------------------------------

struct TextRef {
    std::string text;
    double weight = 1.0;
};

struct ImageRef {
    Image image;                 // 512x512, channels in [0,1]
    double weight = 1.0;
    std::string content_digest;  // SHA-256 over the pixel buffer, set at construction
};

/// Builds an ImageRef, computing the content digest of the pixel buffer.
ImageRef make_image_ref(Image image, double weight);

/// The multimodal style definition: any mixture of text and image references
/// with nonnegative weights that normalize_weights scales to weight_budget.
struct StyleSpec {
    std::vector<TextRef> text_refs;
    std::vector<ImageRef> image_refs;
    double weight_budget = 1000.0;
};

/// Throws ConfigError/AllZeroWeights on malformed specs.
void validate(const StyleSpec& spec);

/// Rescales all weights proportionally so they sum to weight_budget exactly.
/// Idempotent; throws AllZeroWeights when no weight is positive.
StyleSpec normalize_weights(StyleSpec spec);

/// Stable digest over the normalized spec (refs sorted, weights rounded to
/// 6 decimals) plus the backend identity strings.
std::string spec_digest(const StyleSpec& spec, const std::vector<std::string>& backend_identities);

// ---------------------------------------------------------------------------
// Latents and representations
// ---------------------------------------------------------------------------

/// A point in the generator's extended latent space: one row per synthesis
/// layer.
struct LatentCode {
    int layers = 0;
    int dim = 0;
    std::vector<double> data;  // layers * dim, row-major

    LatentCode() = default;
    LatentCode(int l, int d) : layers(l), dim(d), data(static_cast<std::size_t>(l) * d, 0.0) {}

    double& at(int l, int d_) { return data[static_cast<std::size_t>(l) * dim + d_]; }
    double at(int l, int d_) const { return data[static_cast<std::size_t>(l) * dim + d_]; }
};

void validate(const LatentCode& code, int expect_layers, int expect_dim);

/// A generated style image together with the latent it was synthesized from.
struct StyleRepresentation {
    Image image;
    LatentCode latent;
    double final_loss = 0.0;
    std::string spec_digest;
};

// ---------------------------------------------------------------------------
// Patches and directions
// ---------------------------------------------------------------------------

struct PatchSet {
    std::vector<Image> patches;
    std::string source_id;
    std::uint64_t rng_seed = 0;
};

/// An embedding-space difference vector.
using Direction = std::vector<double>;

// ---------------------------------------------------------------------------
// Configuration records
// ---------------------------------------------------------------------------

struct PatchConfig {
    int n_crop = 64;
    int patch_size = 256;
    int embed_size = 224;
    double distortion_scale = 0.5;
    bool augment = true;
    /// When set, every loss evaluation reuses the base patch seed instead of
    /// re-cropping per step. Used by gradient checks.
    bool fixed_patches = false;
};

void validate(const PatchConfig& cfg, int image_side, int embedder_input_size);

struct InversionConfig {
    double learning_rate = 0.2;
    int iterations = 20;
    int init_candidates = 16;
    double early_stop_tol = 0.0;  // 0 disables early stopping
    std::uint64_t rng_seed = 0;
};

void validate(const InversionConfig& cfg);

struct BoostConfig {
    int n_styles = 4;
};

void validate(const BoostConfig& cfg);

void validate(const PatchSet& set, const PatchConfig& cfg);

}  // namespace mmist
