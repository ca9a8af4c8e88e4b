// SPDX-License-Identifier: Apache-2.0

#include "mmist/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmist/digest.hpp"

namespace mmist {

ImageRef make_image_ref(Image image, double weight) {
    ImageRef ref;
    ref.content_digest =
        sha256_hex(image.data.data(), image.data.size() * sizeof(double));
    ref.image = std::move(image);
    ref.weight = weight;
    return ref;
}

void validate(const StyleSpec& spec) {
    if (spec.text_refs.empty() && spec.image_refs.empty())
        throw ConfigError("style spec needs at least one text or image reference");
    if (!(spec.weight_budget > 0) || !std::isfinite(spec.weight_budget))
        throw ConfigError("weight_budget must be a positive finite value");
    bool any_positive = false;
    const auto check = [&](double w) {
        if (!std::isfinite(w) || w < 0) throw ConfigError("style weights must be finite and >= 0");
        any_positive = any_positive || w > 0;
    };
    for (const auto& t : spec.text_refs) {
        if (t.text.empty()) throw ConfigError("text reference must not be empty");
        check(t.weight);
    }
    for (const auto& i : spec.image_refs) {
        if (i.image.height != kImageSide || i.image.width != kImageSide)
            throw ConfigError("image references must be 512x512");
        if (!image_in_unit_range(i.image))
            throw ConfigError("image reference channels must lie in [0,1]");
        check(i.weight);
    }
    if (!any_positive) throw AllZeroWeights();
}

StyleSpec normalize_weights(StyleSpec spec) {
    validate(spec);
    double sum = 0.0;
    for (const auto& t : spec.text_refs) sum += t.weight;
    for (const auto& i : spec.image_refs) sum += i.weight;
    if (sum == spec.weight_budget) return spec;  // already normalized, keep bits

    const double scale = spec.weight_budget / sum;
    // Scale every weight, then assign the residual to the last positive one so
    // the total hits the budget exactly.
    double running = 0.0;
    double* last_positive = nullptr;
    const auto rescale = [&](double& w) {
        w *= scale;
        if (w > 0) last_positive = &w;
        running += w;
    };
    for (auto& t : spec.text_refs) rescale(t.weight);
    for (auto& i : spec.image_refs) rescale(i.weight);
    if (last_positive) *last_positive += spec.weight_budget - running;
    return spec;
}

std::string spec_digest(const StyleSpec& raw, const std::vector<std::string>& backend_identities) {
    const StyleSpec spec = normalize_weights(raw);
    char buf[64];
    std::vector<std::string> parts;
    parts.reserve(spec.text_refs.size() + spec.image_refs.size());
    for (const auto& t : spec.text_refs) {
        std::snprintf(buf, sizeof(buf), "%.6f", t.weight);
        parts.push_back("T\x1f" + t.text + "\x1f" + buf);
    }
    for (const auto& i : spec.image_refs) {
        std::snprintf(buf, sizeof(buf), "%.6f", i.weight);
        parts.push_back("I\x1f" + i.content_digest + "\x1f" + buf);
    }
    std::sort(parts.begin(), parts.end());
    std::ostringstream canon;
    canon << "mmist-spec/1\x1e";
    std::snprintf(buf, sizeof(buf), "%.6f", spec.weight_budget);
    canon << "budget=" << buf << "\x1e";
    for (const auto& p : parts) canon << p << "\x1e";
    for (const auto& id : backend_identities) canon << "B\x1f" << id << "\x1e";
    return sha256_hex(canon.str());
}

void validate(const LatentCode& code, int expect_layers, int expect_dim) {
    if (code.layers != expect_layers || code.dim != expect_dim)
        throw ShapeMismatch("latent code shape does not match backend latent space");
    if (code.data.size() != static_cast<std::size_t>(code.layers) * code.dim)
        throw ShapeMismatch("latent code buffer size inconsistent with shape");
    for (double v : code.data)
        if (!std::isfinite(v)) throw ConfigError("latent code has non-finite entries");
}

void validate(const PatchConfig& cfg, int image_side, int embedder_input_size) {
    if (cfg.n_crop <= 0) throw ConfigError("n_crop must be positive");
    if (cfg.patch_size <= 0 || cfg.embed_size <= 0)
        throw ConfigError("patch and embed sizes must be positive");
    if (cfg.patch_size > image_side)
        throw PatchTooLarge("patch_size exceeds image side");
    if (!(cfg.distortion_scale >= 0.0 && cfg.distortion_scale <= 1.0))
        throw ConfigError("distortion_scale must lie in [0,1]");
    if (embedder_input_size > 0 && cfg.embed_size != embedder_input_size)
        throw ConfigError("embed_size must equal the embedder input size");
}

void validate(const InversionConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (cfg.iterations <= 0) throw ConfigError("iterations must be positive");
    if (cfg.init_candidates < 1) throw ConfigError("init_candidates must be >= 1");
    if (cfg.early_stop_tol < 0) throw ConfigError("early_stop_tol must be >= 0");
}

void validate(const BoostConfig& cfg) {
    if (cfg.n_styles < 1) throw ConfigError("n_styles must be >= 1");
}

void validate(const PatchSet& set, const PatchConfig& cfg) {
    if (static_cast<int>(set.patches.size()) != cfg.n_crop)
        throw ConfigError("patch set size does not match n_crop");
    for (const auto& p : set.patches)
        if (!image_in_unit_range(p)) throw ConfigError("patch pixels out of [0,1]");
}

}  // namespace mmist
