// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmist/core_types.hpp"
#include "mmist/kernels.hpp"

namespace mmist {

// Implements crop(.) and aug(.): random square crops, random perspective
// warps, and the resize to the embedder input side. Everything is a pure
// function of (input, config, seed).

/// The sampled geometry of one patch batch: crop origins plus, when
/// augmentation is active, one output-to-source homography per patch.
struct PatchPlan {
    int patch_size = 0;
    int embed_size = 0;
    bool augmented = false;
    std::vector<int> origin_x;
    std::vector<int> origin_y;
    std::vector<kernels::Homography> homographies;
    std::uint64_t seed = 0;
};

/// Draws the full plan for cfg.n_crop patches. Crop origins come from the
/// CropPlan stream of `seed`, corner displacements from the AugPlan stream,
/// so composing crop_patches + augment_patches with the same seed reproduces
/// the fused path exactly.
PatchPlan make_patch_plan(int image_h, int image_w, const PatchConfig& cfg, std::uint64_t seed);

PatchSet crop_patches(const Image& image, const PatchConfig& cfg, std::uint64_t seed,
                      const std::string& source_id = {});

/// Independent perspective warp per patch; identity pass-through when
/// cfg.augment is false or the distortion scale is zero.
PatchSet augment_patches(const PatchSet& patches, const PatchConfig& cfg, std::uint64_t seed);

/// Bilinear resize of every patch to cfg.embed_size.
PatchSet prepare_for_embedding(const PatchSet& patches, const PatchConfig& cfg);

/// Fused crop -> warp -> resize, one embed-size patch per plan entry.
std::vector<Image> extract_for_embedding(const Image& image, const PatchPlan& plan);

/// Adjoint of extract_for_embedding: grad w.r.t. the source image.
Image extract_for_embedding_vjp(const PatchPlan& plan, int image_h, int image_w,
                                const std::vector<Image>& grad_patches);

}  // namespace mmist
