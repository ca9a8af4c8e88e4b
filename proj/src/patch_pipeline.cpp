// SPDX-License-Identifier: Apache-2.0

#include "mmist/patch_pipeline.hpp"

#include <random>

namespace mmist {

namespace {

// Patch corners in drawing order: TL, TR, BR, BL.
void patch_corners(int side, double out[4][2]) {
    const double s = side - 1;
    out[0][0] = 0, out[0][1] = 0;
    out[1][0] = s, out[1][1] = 0;
    out[2][0] = s, out[2][1] = s;
    out[3][0] = 0, out[3][1] = s;
}

kernels::Homography draw_perspective(std::mt19937_64& eng, int side, double distortion) {
    std::uniform_real_distribution<double> u(0.0, distortion * side / 2.0);
    double start[4][2];
    patch_corners(side, start);
    double end[4][2];
    for (int i = 0; i < 4; ++i) {
        const double dx = u(eng);
        const double dy = u(eng);
        // Inward displacement.
        end[i][0] = start[i][0] + (start[i][0] == 0 ? dx : -dx);
        end[i][1] = start[i][1] + (start[i][1] == 0 ? dy : -dy);
    }
    return kernels::solve_homography(end, start);
}

Image patch_forward(const Image& image, const PatchPlan& plan, std::size_t j) {
    // Per-patch work is the parallel unit, so the inner kernels run serial.
    Image p = kernels::ref::crop(image, plan.origin_x[j], plan.origin_y[j], plan.patch_size);
    if (plan.augmented) p = kernels::ref::warp_perspective(p, plan.homographies[j]);
    if (plan.embed_size != plan.patch_size)
        p = kernels::ref::bilinear_resize(p, plan.embed_size, plan.embed_size);
    return p;
}

}  // namespace

PatchPlan make_patch_plan(int image_h, int image_w, const PatchConfig& cfg, std::uint64_t seed) {
    if (cfg.patch_size > image_h || cfg.patch_size > image_w)
        throw PatchTooLarge("patch_size exceeds image side");
    if (cfg.n_crop <= 0) throw ConfigError("n_crop must be positive");

    PatchPlan plan;
    plan.patch_size = cfg.patch_size;
    plan.embed_size = cfg.embed_size;
    plan.seed = seed;
    plan.origin_x.resize(cfg.n_crop);
    plan.origin_y.resize(cfg.n_crop);

    auto crop_eng = make_engine(derive_seed(seed, SeedStream::CropPlan));
    std::uniform_int_distribution<int> ux(0, image_w - cfg.patch_size);
    std::uniform_int_distribution<int> uy(0, image_h - cfg.patch_size);
    for (int j = 0; j < cfg.n_crop; ++j) {
        plan.origin_x[j] = ux(crop_eng);
        plan.origin_y[j] = uy(crop_eng);
    }

    plan.augmented = cfg.augment && cfg.distortion_scale > 0.0;
    if (plan.augmented) {
        auto aug_eng = make_engine(derive_seed(seed, SeedStream::AugPlan));
        plan.homographies.reserve(cfg.n_crop);
        for (int j = 0; j < cfg.n_crop; ++j)
            plan.homographies.push_back(
                draw_perspective(aug_eng, cfg.patch_size, cfg.distortion_scale));
    }
    return plan;
}

PatchSet crop_patches(const Image& image, const PatchConfig& cfg, std::uint64_t seed,
                      const std::string& source_id) {
    const PatchPlan plan = make_patch_plan(image.height, image.width, cfg, seed);
    PatchSet set;
    set.source_id = source_id;
    set.rng_seed = seed;
    set.patches.resize(cfg.n_crop);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < cfg.n_crop; ++j)
        set.patches[j] =
            kernels::ref::crop(image, plan.origin_x[j], plan.origin_y[j], plan.patch_size);
    return set;
}

PatchSet augment_patches(const PatchSet& patches, const PatchConfig& cfg, std::uint64_t seed) {
    if (!cfg.augment || cfg.distortion_scale <= 0.0) return patches;

    auto aug_eng = make_engine(derive_seed(seed, SeedStream::AugPlan));
    std::vector<kernels::Homography> hs;
    hs.reserve(patches.patches.size());
    for (std::size_t j = 0; j < patches.patches.size(); ++j)
        hs.push_back(
            draw_perspective(aug_eng, patches.patches[j].height, cfg.distortion_scale));

    PatchSet out;
    out.source_id = patches.source_id;
    out.rng_seed = patches.rng_seed;
    out.patches.resize(patches.patches.size());
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < patches.patches.size(); ++j)
        out.patches[j] = kernels::ref::warp_perspective(patches.patches[j], hs[j]);
    return out;
}

PatchSet prepare_for_embedding(const PatchSet& patches, const PatchConfig& cfg) {
    PatchSet out;
    out.source_id = patches.source_id;
    out.rng_seed = patches.rng_seed;
    out.patches.resize(patches.patches.size());
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < patches.patches.size(); ++j) {
        const Image& p = patches.patches[j];
        out.patches[j] = (p.height == cfg.embed_size && p.width == cfg.embed_size)
                             ? p
                             : kernels::ref::bilinear_resize(p, cfg.embed_size, cfg.embed_size);
    }
    return out;
}

std::vector<Image> extract_for_embedding(const Image& image, const PatchPlan& plan) {
    const int n = static_cast<int>(plan.origin_x.size());
    std::vector<Image> out(n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) out[j] = patch_forward(image, plan, j);
    return out;
}

Image extract_for_embedding_vjp(const PatchPlan& plan, int image_h, int image_w,
                                const std::vector<Image>& grad_patches) {
    const int n = static_cast<int>(plan.origin_x.size());
    if (static_cast<int>(grad_patches.size()) != n)
        throw ShapeMismatch("extract_for_embedding_vjp: gradient count mismatch");

    std::vector<Image> crop_grads(n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        Image g = grad_patches[j];
        if (plan.embed_size != plan.patch_size)
            g = kernels::ref::bilinear_resize_vjp(plan.patch_size, plan.patch_size, g);
        if (plan.augmented)
            g = kernels::ref::warp_perspective_vjp(plan.patch_size, plan.patch_size,
                                                   plan.homographies[j], g);
        crop_grads[j] = std::move(g);
    }
    Image grad(image_h, image_w);
    kernels::accumulate_crop_grads(crop_grads, plan.origin_x, plan.origin_y, grad);
    return grad;
}

}  // namespace mmist
