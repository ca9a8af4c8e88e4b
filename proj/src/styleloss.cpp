// SPDX-License-Identifier: Apache-2.0

#include "mmist/styleloss.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmist/kernels.hpp"

namespace mmist {

namespace {

std::string apply_template(const std::string& tmpl, const std::string& text) {
    const auto pos = tmpl.find("{}");
    if (pos == std::string::npos) return tmpl + " " + text;
    return tmpl.substr(0, pos) + text + tmpl.substr(pos + 2);
}

void l2_normalize(std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-12) return;  // leave (near-)zero vectors untouched
    for (double& x : v) x /= n;
}

/// grad of <upstream, v/|v|> w.r.t. v, evaluated at v with unit vhat = v/|v|.
void l2_normalize_vjp(const std::vector<double>& vhat, double norm,
                      const std::vector<double>& upstream, std::vector<double>& grad) {
    const std::size_t dim = vhat.size();
    grad.assign(dim, 0.0);
    if (norm < 1e-12) {
        grad = upstream;
        return;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) d += vhat[i] * upstream[i];
    for (std::size_t i = 0; i < dim; ++i) grad[i] = (upstream[i] - vhat[i] * d) / norm;
}

std::vector<double> flatten(const std::vector<Direction>& dirs) {
    if (dirs.empty()) return {};
    std::vector<double> flat;
    flat.reserve(dirs.size() * dirs[0].size());
    for (const auto& d : dirs) flat.insert(flat.end(), d.begin(), d.end());
    return flat;
}

}  // namespace

const std::vector<std::string>& default_prompt_templates() {
    static const std::vector<std::string> kTemplates = {
        "a photo of {}",
        "an image in the style of {}",
        "artwork in the style of {}",
        "a painting in the style of {}",
        "a picture in the style of {}",
        "a rendering in the style of {}",
        "a cropped photo of {}",
        "art in the style of {}",
    };
    return kTemplates;
}

void validate(const LossConfig& cfg) {
    if (cfg.src_text.empty()) throw ConfigError("src_text must not be empty");
    if (!cfg.src_image.empty()) {
        if (cfg.src_image.height != kImageSide || cfg.src_image.width != kImageSide)
            throw ConfigError("src_image must be 512x512");
        if (!image_in_unit_range(cfg.src_image))
            throw ConfigError("src_image channels must lie in [0,1]");
    }
}

Image resolve_source_image(const LossConfig& cfg) {
    return cfg.src_image.empty() ? default_source_image(kImageSide) : cfg.src_image;
}

std::string format_breakdown(const LossBreakdown& b) {
    std::ostringstream os;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "loss=%.9g", b.total);
    os << buf;
    for (const auto& [i, v] : b.per_text) {
        std::snprintf(buf, sizeof(buf), " text%d=%.9g", i, v);
        os << buf;
    }
    for (const auto& [i, v] : b.per_image) {
        std::snprintf(buf, sizeof(buf), " image%d=%.9g", i, v);
        os << buf;
    }
    return os.str();
}

Direction text_direction(const std::string& text, const LossConfig& cfg,
                         const EmbedderBackend& embedder) {
    validate(cfg);
    const auto& templates =
        cfg.prompt_templates.empty() ? default_prompt_templates() : cfg.prompt_templates;
    const int dim = embedder.embed_dim();
    std::vector<double> target(dim, 0.0), source(dim, 0.0);
    for (const auto& t : templates) {
        auto te = embedder.embed_text(apply_template(t, text));
        auto se = embedder.embed_text(apply_template(t, cfg.src_text));
        if (cfg.normalize_embeddings) {
            l2_normalize(te);
            l2_normalize(se);
        }
        for (int i = 0; i < dim; ++i) {
            target[i] += te[i];
            source[i] += se[i];
        }
    }
    Direction dir(dim);
    const double inv = 1.0 / static_cast<double>(templates.size());
    for (int i = 0; i < dim; ++i) dir[i] = (target[i] - source[i]) * inv;
    return dir;
}

std::vector<Direction> patch_directions(const PatchSet& prepared, const LossConfig& cfg,
                                        const EmbedderBackend& embedder) {
    validate(cfg);
    const int side = embedder.input_size();
    auto src = kernels::bilinear_resize(resolve_source_image(cfg), side, side);
    auto src_embed = embedder.embed_image(src);
    if (cfg.normalize_embeddings) l2_normalize(src_embed);

    const int dim = embedder.embed_dim();
    const int n = static_cast<int>(prepared.patches.size());
    std::vector<Direction> dirs(n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        auto e = embedder.embed_image(prepared.patches[j]);
        if (cfg.normalize_embeddings) l2_normalize(e);
        Direction d(dim);
        for (int i = 0; i < dim; ++i) d[i] = e[i] - src_embed[i];
        dirs[j] = std::move(d);
    }
    return dirs;
}

double text_patch_loss(const std::vector<Direction>& style_dirs, const Direction& text_dir) {
    if (style_dirs.empty()) throw ConfigError("text_patch_loss: no style directions");
    const auto flat = flatten(style_dirs);
    return kernels::mean_directional_loss(flat.data(), static_cast<int>(style_dirs.size()),
                                          static_cast<int>(text_dir.size()), text_dir.data());
}

double image_patch_loss(const std::vector<Direction>& style_dirs,
                        const std::vector<Direction>& ref_dirs) {
    if (style_dirs.empty() || ref_dirs.empty())
        throw ConfigError("image_patch_loss: empty direction list");
    const auto a = flatten(style_dirs);
    const auto b = flatten(ref_dirs);
    return kernels::pairwise_directional_loss(a.data(), static_cast<int>(style_dirs.size()),
                                              b.data(), static_cast<int>(ref_dirs.size()),
                                              static_cast<int>(style_dirs[0].size()));
}

// --- StyleLossEvaluator -------------------------------------------------------

StyleLossEvaluator::StyleLossEvaluator(StyleSpec spec, LossConfig loss_cfg, PatchConfig patch_cfg,
                                       const EmbedderBackend& embedder, std::uint64_t ref_seed)
    : spec_(normalize_weights(std::move(spec))),
      loss_cfg_(std::move(loss_cfg)),
      patch_cfg_(patch_cfg),
      embedder_(&embedder),
      ref_seed_(ref_seed),
      dim_(embedder.embed_dim()) {
    validate(loss_cfg_);
    validate(patch_cfg_, kImageSide, embedder.input_size());

    const int side = embedder_->input_size();
    auto src = kernels::bilinear_resize(resolve_source_image(loss_cfg_), side, side);
    src_embedding_ = embedder_->embed_image(src);
    if (loss_cfg_.normalize_embeddings) l2_normalize(src_embedding_);

    text_dirs_.reserve(spec_.text_refs.size());
    for (const auto& t : spec_.text_refs)
        text_dirs_.push_back(text_direction(t.text, loss_cfg_, *embedder_));

    ref_dirs_.reserve(spec_.image_refs.size());
    for (std::size_t i = 0; i < spec_.image_refs.size(); ++i) {
        const auto plan = make_patch_plan(kImageSide, kImageSide, patch_cfg_,
                                          derive_seed(ref_seed_, SeedStream::RefPatches, i));
        const auto patches = extract_for_embedding(spec_.image_refs[i].image, plan);
        std::vector<double> flat(static_cast<std::size_t>(patch_cfg_.n_crop) * dim_);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < patch_cfg_.n_crop; ++j) {
            auto e = embedder_->embed_image(patches[j]);
            if (loss_cfg_.normalize_embeddings) l2_normalize(e);
            for (int d = 0; d < dim_; ++d)
                flat[static_cast<std::size_t>(j) * dim_ + d] = e[d] - src_embedding_[d];
        }
        ref_dirs_.push_back(std::move(flat));
    }
}

std::uint64_t StyleLossEvaluator::step_patch_seed(int step) const {
    return patch_cfg_.fixed_patches ? ref_seed_ : derive_seed(ref_seed_, SeedStream::Step, step);
}

LossBreakdown StyleLossEvaluator::evaluate(const Image& style_image,
                                           std::uint64_t patch_seed) const {
    return run(style_image, patch_seed, nullptr);
}

LossBreakdown StyleLossEvaluator::evaluate_with_grad(const Image& style_image,
                                                     std::uint64_t patch_seed,
                                                     Image& grad_image) const {
    return run(style_image, patch_seed, &grad_image);
}

LossBreakdown StyleLossEvaluator::run(const Image& style_image, std::uint64_t patch_seed,
                                      Image* grad_image) const {
    if (style_image.height != kImageSide || style_image.width != kImageSide)
        throw ShapeMismatch("style image must be 512x512");

    const int n = patch_cfg_.n_crop;
    const auto plan = make_patch_plan(style_image.height, style_image.width, patch_cfg_,
                                      patch_seed);
    const auto patches = extract_for_embedding(style_image, plan);

    // Raw embeddings kept around for the normalization pullback.
    std::vector<std::vector<double>> unit(n);
    std::vector<double> norms(n, 0.0);
    std::vector<double> dirs(static_cast<std::size_t>(n) * dim_);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        auto e = embedder_->embed_image(patches[j]);
        double nn = 0.0;
        for (double x : e) nn += x * x;
        norms[j] = std::sqrt(nn);
        if (loss_cfg_.normalize_embeddings) l2_normalize(e);
        for (int d = 0; d < dim_; ++d)
            dirs[static_cast<std::size_t>(j) * dim_ + d] = e[d] - src_embedding_[d];
        unit[j] = std::move(e);
    }

    LossBreakdown out;
    for (std::size_t i = 0; i < text_dirs_.size(); ++i)
        out.per_text.emplace_back(static_cast<int>(i),
                                  kernels::mean_directional_loss(dirs.data(), n, dim_,
                                                                 text_dirs_[i].data()));
    for (std::size_t i = 0; i < ref_dirs_.size(); ++i)
        out.per_image.emplace_back(static_cast<int>(i),
                                   kernels::pairwise_directional_loss(dirs.data(), n,
                                                                      ref_dirs_[i].data(), n,
                                                                      dim_));
    double total = 0.0;
    for (std::size_t i = 0; i < out.per_text.size(); ++i)
        total += spec_.text_refs[i].weight * out.per_text[i].second;
    for (std::size_t i = 0; i < out.per_image.size(); ++i)
        total += spec_.image_refs[i].weight * out.per_image[i].second;
    out.total = total;

    if (!grad_image) return out;

    // Pull the weighted loss back through the direction matrix.
    std::vector<double> grad_dirs(static_cast<std::size_t>(n) * dim_, 0.0);
    for (std::size_t i = 0; i < text_dirs_.size(); ++i)
        kernels::mean_directional_loss_vjp(dirs.data(), n, dim_, text_dirs_[i].data(),
                                           spec_.text_refs[i].weight, grad_dirs.data());
    for (std::size_t i = 0; i < ref_dirs_.size(); ++i)
        kernels::pairwise_directional_loss_vjp(dirs.data(), n, dim_, ref_dirs_[i].data(), n,
                                               spec_.image_refs[i].weight, grad_dirs.data());

    // Direction -> raw embedding -> patch pixels.
    std::vector<Image> grad_patches(n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        std::vector<double> up(grad_dirs.begin() + static_cast<std::size_t>(j) * dim_,
                               grad_dirs.begin() + static_cast<std::size_t>(j + 1) * dim_);
        std::vector<double> grad_embed;
        if (loss_cfg_.normalize_embeddings)
            l2_normalize_vjp(unit[j], norms[j], up, grad_embed);
        else
            grad_embed = std::move(up);
        grad_patches[j] = embedder_->embed_image_vjp(patches[j], grad_embed);
    }
    *grad_image = extract_for_embedding_vjp(plan, style_image.height, style_image.width,
                                            grad_patches);
    return out;
}

LossBreakdown total_loss(const Image& style_image, const StyleSpec& spec, const LossConfig& cfg,
                         const PatchConfig& patch_cfg, const EmbedderBackend& embedder,
                         std::uint64_t seed) {
    StyleLossEvaluator eval(spec, cfg, patch_cfg, embedder, seed);
    return eval.evaluate(style_image, eval.step_patch_seed(0));
}

}  // namespace mmist
