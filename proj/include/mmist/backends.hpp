// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mmist/core_types.hpp"

namespace mmist {

// ---------------------------------------------------------------------------
// Pretrained-component interfaces. Implementations are read-only after load
// and must tolerate concurrent calls.
// ---------------------------------------------------------------------------

class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;

    virtual std::string identity() const = 0;
    virtual int latent_layers() const = 0;
    virtual int latent_dim() const = 0;
    virtual int z_dim() const = 0;
    virtual int output_size() const = 0;

    /// Mapping network: z -> W+, a single mapped w broadcast to every layer.
    virtual LatentCode map(std::span<const double> z) const = 0;

    /// Pure synthesis of a 512x512 image in [0,1] from a latent code.
    virtual Image synthesize(const LatentCode& w) const = 0;

    /// grad_w of <upstream, synthesize(w)>. Throws BackendFailure when the
    /// backend cannot provide gradients.
    virtual LatentCode synthesize_vjp(const LatentCode& w, const Image& upstream) const;
};

class EmbedderBackend {
public:
    virtual ~EmbedderBackend() = default;

    virtual std::string identity() const = 0;
    virtual int embed_dim() const = 0;
    virtual int input_size() const = 0;

    virtual std::vector<double> embed_image(const Image& image) const = 0;
    virtual std::vector<double> embed_text(const std::string& text) const = 0;

    /// grad_image of <upstream, embed_image(image)>.
    virtual Image embed_image_vjp(const Image& at, std::span<const double> upstream) const;
};

/// i.i.d. standard-normal latent seed draws, deterministic per seed.
std::vector<double> sample_z(int dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Toy backends: small deterministic differentiable stand-ins used by the
// test suite and the default CLI backend selection.
// ---------------------------------------------------------------------------

struct ToyGeneratorConfig {
    int layers = 4;
    int dim = 16;
    int z_dim = 8;
    int hidden = 32;
    int base_res = 16;  // internal resolution before upsampling to output
    int output = kImageSide;
    std::uint64_t seed = 7001;
};

/// Two-stage affine generator: w -> tanh(A1 w + 0) -> sigmoid(A2 h + 0)
/// reshaped to base_res^2 RGB and bilinearly upsampled to the output side.
/// Biases are zero, so synthesize(0) is a uniform 0.5 image.
class ToyGenerator final : public GeneratorBackend {
public:
    explicit ToyGenerator(ToyGeneratorConfig cfg = {});

    std::string identity() const override;
    int latent_layers() const override { return cfg_.layers; }
    int latent_dim() const override { return cfg_.dim; }
    int z_dim() const override { return cfg_.z_dim; }
    int output_size() const override { return cfg_.output; }

    LatentCode map(std::span<const double> z) const override;
    Image synthesize(const LatentCode& w) const override;
    LatentCode synthesize_vjp(const LatentCode& w, const Image& upstream) const override;

private:
    ToyGeneratorConfig cfg_;
    std::vector<double> map_w_;  // dim x z_dim
    std::vector<double> w1_;     // hidden x (layers*dim)
    std::vector<double> w2_;     // (3*base_res^2) x hidden

    void small_forward(const LatentCode& w, std::vector<double>& hidden_pre,
                       std::vector<double>& small) const;
};

struct ToyEmbedderConfig {
    int embed_dim = 16;
    int input_size = 224;
    std::uint64_t seed = 7002;
};

/// Linear image embedder (fixed random projection of flattened pixels) plus a
/// deterministic text table: known style words get fixed vectors, anything
/// else falls back to a hash-seeded vector.
class ToyEmbedder final : public EmbedderBackend {
public:
    explicit ToyEmbedder(ToyEmbedderConfig cfg = {});

    std::string identity() const override;
    int embed_dim() const override { return cfg_.embed_dim; }
    int input_size() const override { return cfg_.input_size; }

    std::vector<double> embed_image(const Image& image) const override;
    std::vector<double> embed_text(const std::string& text) const override;
    Image embed_image_vjp(const Image& at, std::span<const double> upstream) const override;

    /// The projection matrix (embed_dim x 3*input_size^2); used by oracles.
    const std::vector<double>& projection() const { return proj_; }

private:
    ToyEmbedderConfig cfg_;
    std::vector<double> proj_;
};

// ---------------------------------------------------------------------------
// Instrumented wrappers for structural assertions (call counting).
// ---------------------------------------------------------------------------

class CountingGenerator final : public GeneratorBackend {
public:
    explicit CountingGenerator(std::shared_ptr<const GeneratorBackend> inner)
        : inner_(std::move(inner)) {}

    std::string identity() const override { return inner_->identity(); }
    int latent_layers() const override { return inner_->latent_layers(); }
    int latent_dim() const override { return inner_->latent_dim(); }
    int z_dim() const override { return inner_->z_dim(); }
    int output_size() const override { return inner_->output_size(); }

    LatentCode map(std::span<const double> z) const override {
        ++map_calls;
        return inner_->map(z);
    }
    Image synthesize(const LatentCode& w) const override {
        ++synthesize_calls;
        return inner_->synthesize(w);
    }
    LatentCode synthesize_vjp(const LatentCode& w, const Image& upstream) const override {
        ++vjp_calls;
        return inner_->synthesize_vjp(w, upstream);
    }

    mutable std::atomic<long> map_calls{0};
    mutable std::atomic<long> synthesize_calls{0};
    mutable std::atomic<long> vjp_calls{0};

private:
    std::shared_ptr<const GeneratorBackend> inner_;
};

class CountingEmbedder final : public EmbedderBackend {
public:
    explicit CountingEmbedder(std::shared_ptr<const EmbedderBackend> inner)
        : inner_(std::move(inner)) {}

    std::string identity() const override { return inner_->identity(); }
    int embed_dim() const override { return inner_->embed_dim(); }
    int input_size() const override { return inner_->input_size(); }

    std::vector<double> embed_image(const Image& image) const override {
        ++image_calls;
        return inner_->embed_image(image);
    }
    std::vector<double> embed_text(const std::string& text) const override {
        ++text_calls;
        return inner_->embed_text(text);
    }
    Image embed_image_vjp(const Image& at, std::span<const double> upstream) const override {
        ++vjp_calls;
        return inner_->embed_image_vjp(at, upstream);
    }

    mutable std::atomic<long> image_calls{0};
    mutable std::atomic<long> text_calls{0};
    mutable std::atomic<long> vjp_calls{0};

private:
    std::shared_ptr<const EmbedderBackend> inner_;
};

}  // namespace mmist
