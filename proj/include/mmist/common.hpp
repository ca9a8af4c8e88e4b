// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mmist {

// ---------------------------------------------------------------------------
// Error hierarchy. Everything user-recoverable derives from Error so callers
// can distinguish configuration mistakes (ConfigError, exit code 2) from
// runtime failures (exit code 1).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or spec detected before any work starts.
struct ConfigError : Error {
    using Error::Error;
};

struct AllZeroWeights : ConfigError {
    AllZeroWeights() : ConfigError("style spec has no positive weight") {}
};

struct PatchTooLarge : ConfigError {
    using ConfigError::ConfigError;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct BackendFailure : Error {
    using Error::Error;
};

struct EmbedderFailure : BackendFailure {
    using BackendFailure::BackendFailure;
};

struct CacheCorruption : Error {
    using Error::Error;
};

struct StaleCache : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic seed derivation. Every random decision in the pipeline is a
// pure function of (user seed, stream, index); no engine state is shared
// between stages.
// ---------------------------------------------------------------------------

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent well-separated seed streams used across the pipeline.
enum class SeedStream : std::uint64_t {
    CropPlan = 1,
    AugPlan = 2,
    RefPatches = 3,
    InitLatents = 4,
    InitPatches = 5,
    Step = 6,
    FinalEval = 7,
    BoostRun = 8,
    SampleZ = 9,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, SeedStream stream,
                                    std::uint64_t index = 0) {
    return mix64(mix64(base ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL)) ^
                 mix64(index + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(mix64(seed));
}

}  // namespace mmist
