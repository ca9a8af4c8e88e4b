// SPDX-License-Identifier: Apache-2.0

#include "mmist/backends.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "mmist/kernels.hpp"

namespace mmist {

LatentCode GeneratorBackend::synthesize_vjp(const LatentCode&, const Image&) const {
    throw BackendFailure("generator backend does not provide gradients");
}

Image EmbedderBackend::embed_image_vjp(const Image&, std::span<const double>) const {
    throw BackendFailure("embedder backend does not provide gradients");
}

std::vector<double> sample_z(int dim, std::uint64_t seed) {
    auto eng = make_engine(derive_seed(seed, SeedStream::SampleZ));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(dim);
    for (auto& v : z) v = normal(eng);
    return z;
}

namespace {

std::vector<double> gaussian_matrix(int rows, int cols, double stddev, std::uint64_t seed) {
    auto eng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, stddev);
    std::vector<double> m(static_cast<std::size_t>(rows) * cols);
    for (auto& v : m) v = normal(eng);
    return m;
}

}  // namespace

// --- ToyGenerator ------------------------------------------------------------

ToyGenerator::ToyGenerator(ToyGeneratorConfig cfg) : cfg_(cfg) {
    const int flat = cfg_.layers * cfg_.dim;
    const int out = 3 * cfg_.base_res * cfg_.base_res;
    map_w_ = gaussian_matrix(cfg_.dim, cfg_.z_dim, 1.0 / std::sqrt(cfg_.z_dim),
                             mix64(cfg_.seed ^ 0xA1));
    w1_ = gaussian_matrix(cfg_.hidden, flat, 1.0 / std::sqrt(flat), mix64(cfg_.seed ^ 0xA2));
    w2_ = gaussian_matrix(out, cfg_.hidden, 2.0 / std::sqrt(cfg_.hidden),
                          mix64(cfg_.seed ^ 0xA3));
}

std::string ToyGenerator::identity() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "toy-gen/1;L=%d,D=%d,z=%d,h=%d,r=%d,out=%d,seed=%llu",
                  cfg_.layers, cfg_.dim, cfg_.z_dim, cfg_.hidden, cfg_.base_res, cfg_.output,
                  static_cast<unsigned long long>(cfg_.seed));
    return buf;
}

LatentCode ToyGenerator::map(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != cfg_.z_dim)
        throw BackendFailure("map: z dimension mismatch");
    std::vector<double> row(cfg_.dim);
    kernels::matvec(map_w_.data(), cfg_.dim, cfg_.z_dim, z.data(), row.data());
    LatentCode code(cfg_.layers, cfg_.dim);
    for (int l = 0; l < cfg_.layers; ++l)
        for (int d = 0; d < cfg_.dim; ++d) code.at(l, d) = std::tanh(row[d]);
    return code;
}

void ToyGenerator::small_forward(const LatentCode& w, std::vector<double>& hidden_pre,
                                 std::vector<double>& small) const {
    const int flat = cfg_.layers * cfg_.dim;
    const int out = 3 * cfg_.base_res * cfg_.base_res;
    hidden_pre.assign(cfg_.hidden, 0.0);
    kernels::matvec(w1_.data(), cfg_.hidden, flat, w.data.data(), hidden_pre.data());
    std::vector<double> hidden(cfg_.hidden);
    for (int i = 0; i < cfg_.hidden; ++i) hidden[i] = std::tanh(hidden_pre[i]);
    small.assign(out, 0.0);
    kernels::matvec(w2_.data(), out, cfg_.hidden, hidden.data(), small.data());
    for (auto& v : small) v = 1.0 / (1.0 + std::exp(-v));
}

Image ToyGenerator::synthesize(const LatentCode& w) const {
    validate(w, cfg_.layers, cfg_.dim);
    std::vector<double> hidden_pre, small;
    small_forward(w, hidden_pre, small);
    Image base(cfg_.base_res, cfg_.base_res);
    // small is plane-interleaved per pixel: 3 consecutive channels per pixel.
    base.data.assign(small.begin(), small.end());
    return kernels::bilinear_resize(base, cfg_.output, cfg_.output);
}

LatentCode ToyGenerator::synthesize_vjp(const LatentCode& w, const Image& upstream) const {
    validate(w, cfg_.layers, cfg_.dim);
    if (upstream.height != cfg_.output || upstream.width != cfg_.output)
        throw ShapeMismatch("synthesize_vjp: upstream shape mismatch");
    const int flat = cfg_.layers * cfg_.dim;
    const int out = 3 * cfg_.base_res * cfg_.base_res;

    std::vector<double> hidden_pre, small;
    small_forward(w, hidden_pre, small);

    const Image grad_small_img =
        kernels::bilinear_resize_vjp(cfg_.base_res, cfg_.base_res, upstream);
    std::vector<double> grad_small(grad_small_img.data.begin(), grad_small_img.data.end());
    for (int i = 0; i < out; ++i) {
        const double s = small[i];
        grad_small[i] *= s * (1.0 - s);  // sigmoid'
    }
    std::vector<double> grad_hidden(cfg_.hidden);
    kernels::matvec_transpose(w2_.data(), out, cfg_.hidden, grad_small.data(),
                              grad_hidden.data());
    for (int i = 0; i < cfg_.hidden; ++i) {
        const double t = std::tanh(hidden_pre[i]);
        grad_hidden[i] *= 1.0 - t * t;  // tanh'
    }
    LatentCode grad(cfg_.layers, cfg_.dim);
    kernels::matvec_transpose(w1_.data(), cfg_.hidden, flat, grad_hidden.data(),
                              grad.data.data());
    return grad;
}

// --- ToyEmbedder -------------------------------------------------------------

ToyEmbedder::ToyEmbedder(ToyEmbedderConfig cfg) : cfg_(cfg) {
    const int n = 3 * cfg_.input_size * cfg_.input_size;
    proj_ = gaussian_matrix(cfg_.embed_dim, n, 1.0 / std::sqrt(n), mix64(cfg_.seed ^ 0xB1));
}

std::string ToyEmbedder::identity() const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "toy-embed/1;E=%d,in=%d,seed=%llu", cfg_.embed_dim,
                  cfg_.input_size, static_cast<unsigned long long>(cfg_.seed));
    return buf;
}

std::vector<double> ToyEmbedder::embed_image(const Image& image) const {
    if (image.height != cfg_.input_size || image.width != cfg_.input_size)
        throw EmbedderFailure("embed_image: input must match embedder input size");
    const int n = 3 * cfg_.input_size * cfg_.input_size;
    std::vector<double> e(cfg_.embed_dim);
    kernels::matvec(proj_.data(), cfg_.embed_dim, n, image.data.data(), e.data());
    return e;
}

Image ToyEmbedder::embed_image_vjp(const Image& at, std::span<const double> upstream) const {
    if (static_cast<int>(upstream.size()) != cfg_.embed_dim)
        throw EmbedderFailure("embed_image_vjp: upstream dimension mismatch");
    const int n = 3 * cfg_.input_size * cfg_.input_size;
    Image grad(at.height, at.width);
    kernels::matvec_transpose(proj_.data(), cfg_.embed_dim, n, upstream.data(),
                              grad.data.data());
    return grad;
}

std::vector<double> ToyEmbedder::embed_text(const std::string& text) const {
    // Small fixed vocabulary keeps well-known style words stable across
    // embed_dim-compatible instances; everything else hashes to a bucket.
    static const char* kVocab[] = {
        "a photo",      "oil painting", "watercolor",   "pencil sketch",
        "mosaic",       "cubism",       "pop art",      "stained glass",
        "impressionism", "charcoal",    "ukiyo-e",      "graffiti",
    };
    std::uint64_t seed = 0;
    bool found = false;
    for (std::size_t i = 0; i < std::size(kVocab); ++i) {
        if (text == kVocab[i]) {
            seed = mix64(cfg_.seed ^ (0xC000 + i));
            found = true;
            break;
        }
    }
    if (!found) {
        // FNV-1a over the bytes, folded with the embedder seed.
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char ch : text) h = (h ^ ch) * 1099511628211ULL;
        seed = mix64(cfg_.seed ^ h);
    }
    auto eng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> e(cfg_.embed_dim);
    for (auto& v : e) v = normal(eng);
    return e;
}

}  // namespace mmist
