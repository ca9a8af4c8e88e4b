// SPDX-License-Identifier: Apache-2.0

#include "mmist/inversion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mmist {

std::string format_trace(const InversionTrace& trace) {
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "init_loss=%.9g\n", trace.init_loss);
    os << buf;
    for (const auto& [step, loss] : trace.per_step) {
        std::snprintf(buf, sizeof(buf), "step=%d loss=%.9g\n", step, loss);
        os << buf;
    }
    return os.str();
}

void AdamOptimizer::step(std::vector<double>& x, const std::vector<double>& grad, double lr) {
    if (m.empty()) {
        m.assign(x.size(), 0.0);
        v.assign(x.size(), 0.0);
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon);
    }
}

namespace {

std::uint64_t init_patch_seed(const InversionConfig& cfg, const PatchConfig& patch_cfg) {
    // Shared across candidates so the argmin compares like with like; pinned
    // to the base seed in fixed-patch mode.
    return patch_cfg.fixed_patches ? cfg.rng_seed
                                   : derive_seed(cfg.rng_seed, SeedStream::InitPatches);
}

}  // namespace

LatentCode initialize_latent(const InversionConfig& cfg, const GeneratorBackend& generator,
                             const StyleLossEvaluator& loss, double* best_loss) {
    validate(cfg);
    const std::uint64_t patch_seed = init_patch_seed(cfg, loss.patch_config());

    LatentCode best;
    double best_value = 0.0;
    for (int c = 0; c < cfg.init_candidates; ++c) {
        const auto z = sample_z(generator.z_dim(),
                                derive_seed(cfg.rng_seed, SeedStream::InitLatents, c));
        LatentCode w = generator.map(z);
        const double value = loss.evaluate(generator.synthesize(w), patch_seed).total;
        if (c == 0 || value < best_value) {
            best_value = value;
            best = std::move(w);
        }
    }
    if (best_loss) *best_loss = best_value;
    return best;
}

InversionResult invert(const StyleSpec& spec, const InversionConfig& cfg,
                       const PatchConfig& patch_cfg, const LossConfig& loss_cfg,
                       const GeneratorBackend& generator, const EmbedderBackend& embedder,
                       const StepLogger& log) {
    validate(cfg);
    const auto started = std::chrono::steady_clock::now();
    const StyleLossEvaluator loss(spec, loss_cfg, patch_cfg, embedder, cfg.rng_seed);

    LatentCode w = initialize_latent(cfg, generator, loss);

    InversionTrace trace;
    AdamOptimizer adam;
    for (int t = 1; t <= cfg.iterations; ++t) {
        const Image image = generator.synthesize(w);
        Image grad_image;
        const LossBreakdown b =
            loss.evaluate_with_grad(image, loss.step_patch_seed(t), grad_image);
        if (!std::isfinite(b.total)) {
            trace.wallclock_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
            throw NonFiniteLossError(std::move(trace));
        }
        if (t == 1) trace.init_loss = b.total;
        trace.per_step.emplace_back(t, b.total);
        if (log) log("step=" + std::to_string(t) + " " + format_breakdown(b));

        const LatentCode grad_w = generator.synthesize_vjp(w, grad_image);
        adam.step(w.data, grad_w.data, cfg.learning_rate);

        if (cfg.early_stop_tol > 0 && trace.per_step.size() >= 4) {
            const double prev = trace.per_step[trace.per_step.size() - 4].second;
            const double cur = b.total;
            const double rel = (prev - cur) / std::max(std::abs(prev), 1e-12);
            if (rel < cfg.early_stop_tol) break;
        }
    }

    InversionResult out;
    out.representation.latent = w;
    out.representation.image = generator.synthesize(w);
    const std::uint64_t final_seed = patch_cfg.fixed_patches
                                         ? cfg.rng_seed
                                         : derive_seed(cfg.rng_seed, SeedStream::FinalEval);
    out.representation.final_loss =
        loss.evaluate(out.representation.image, final_seed).total;
    out.representation.spec_digest =
        spec_digest(loss.spec(), {generator.identity(), embedder.identity()});
    trace.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.trace = std::move(trace);
    return out;
}

std::vector<InversionResult> invert_many(const StyleSpec& spec, const BoostConfig& boost,
                                         const InversionConfig& cfg, const PatchConfig& patch_cfg,
                                         const LossConfig& loss_cfg,
                                         const GeneratorBackend& generator,
                                         const EmbedderBackend& embedder, const StepLogger& log) {
    validate(boost);
    std::vector<InversionResult> results;
    results.reserve(boost.n_styles);
    for (int r = 0; r < boost.n_styles; ++r) {
        InversionConfig run_cfg = cfg;
        run_cfg.rng_seed = derive_seed(cfg.rng_seed, SeedStream::BoostRun, r);
        StepLogger run_log;
        if (log) {
            run_log = [&log, r](const std::string& line) {
                log("run=" + std::to_string(r) + " " + line);
            };
        }
        try {
            results.push_back(
                invert(spec, run_cfg, patch_cfg, loss_cfg, generator, embedder, run_log));
        } catch (const Error&) {
            std::throw_with_nested(
                Error("boost run " + std::to_string(r) + " of " +
                      std::to_string(boost.n_styles) + " failed"));
        }
    }
    return results;
}

}  // namespace mmist
